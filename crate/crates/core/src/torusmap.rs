//! Optimal embeddings O_E → R and the induced map ι : Pic(E) → X.

use num_complex::Complex64;
use serde::Serialize;

use crate::qfield::{ClassCharacter, ClassGroup, Form, Splitting};
use crate::quatorder::enumerate::ReducedForm;
use crate::quatorder::{ClassSet, Elem, Lattice, QuatError};

/// An element y of a maximal order with trd(y) = t and nrd(y) = n, t² − 4n = D.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub y: Elem,
    pub trace: i128,
    pub norm: i128,
    /// Class index whose left order contains y (0 means R itself).
    pub host_class: usize,
}

/// Description of the fixed embedding, for report metadata.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingMeta {
    pub y_coordinates: [String; 4],
    pub trace: i128,
    pub norm: i128,
    pub host_class: usize,
}

/// ι together with the embedding that defines it.
#[derive(Debug, Clone)]
pub struct PeriodData {
    pub embedding: Embedding,
    /// ι(y) for each class-group element index y.
    pub iota: Vec<usize>,
    pub class_count: usize,
}

fn search_in(lattice: &Lattice, cs: &ClassSet, trace: i128, norm: i128) -> Option<Elem> {
    let alg = cs.alg();
    let gram = lattice.normalized_gram(alg);
    let rf = ReducedForm::new(&gram);
    let mut found: Option<Elem> = None;
    rf.for_each_short(norm as u64, |x, v| {
        if found.is_some() || v as i128 != norm {
            return;
        }
        let orig: Vec<i64> = (0..4)
            .map(|c| {
                (0..4)
                    .map(|i| x[i] as i128 * rf.transform[i][c])
                    .sum::<i128>() as i64
            })
            .collect();
        let e = lattice.combination(&orig);
        if alg.trd(&e) == (trace, 1) {
            found = Some(e);
        }
    });
    found
}

impl Embedding {
    /// Finds y with the minimal polynomial of ω = (t + √D)/2, t ∈ {0, 1}, in R or a left order.
    pub fn find(cs: &ClassSet, pic: &ClassGroup) -> Result<Self, QuatError> {
        let field = &pic.field;
        let disc = field.disc;
        for (p, _) in crate::arith::factor(cs.level()) {
            if field.splitting(p) != Splitting::Inert {
                return Err(QuatError::UnsupportedCase(format!(
                    "prime {p} dividing the level is not inert in Q(√{disc})"
                )));
            }
        }
        let trace = disc.rem_euclid(2) as i128;
        let norm = (trace * trace - disc as i128) / 4;
        for (k, class) in cs.classes.iter().enumerate() {
            if let Some(y) = search_in(&class.left_order, cs, trace, norm) {
                let emb = Self {
                    y,
                    trace,
                    norm,
                    host_class: k,
                };
                if !emb.is_optimal(cs, disc) {
                    return Err(QuatError::EmbeddingNotFound(disc));
                }
                return Ok(emb);
            }
        }
        Err(QuatError::EmbeddingNotFound(disc))
    }

    /// Checks that no (y − r)/s with s ≥ 2 lies in the host order.
    fn is_optimal(&self, cs: &ClassSet, disc: i64) -> bool {
        let host = &cs.classes[self.host_class].left_order;
        let d = disc.unsigned_abs() as i128;
        (2..)
            .take_while(|s: &i128| s * s <= d)
            .all(|s| (0..s).all(|r| !host.contains(&self.y.sub_int(r).scale(1, s))))
    }

    pub fn meta(&self) -> EmbeddingMeta {
        EmbeddingMeta {
            y_coordinates: self.y.v.map(|c| format!("{c}/{}", self.y.den)),
            trace: self.trace,
            norm: self.norm,
            host_class: self.host_class,
        }
    }

    /// ι of the ideal [a, (−b + √D)/2]: the class of ι(𝔞)·I_host in X.
    pub fn classify_form(&self, form: &Form, cs: &ClassSet) -> Result<usize, QuatError> {
        let alg = cs.alg();
        let host = &cs.classes[self.host_class].ideal;
        let a = form.a as i128;
        // (−b + √D)/2 = (−b − t)/2 + y
        let second = self.y.add(&Elem::integral([
            (-(form.b as i128) - self.trace) / 2,
            0,
            0,
            0,
        ]));
        let first = Elem::integral([a, 0, 0, 0]);
        let mut gens = Vec::with_capacity(8);
        for g in [first, second] {
            for e in host.basis() {
                gens.push(alg.mul(&g, &e));
            }
        }
        let ideal = Lattice::from_elems(&gens)?;
        cs.class_of(&ideal)
    }
}

impl PeriodData {
    pub fn new(cs: &ClassSet, pic: &ClassGroup) -> Result<Self, QuatError> {
        let embedding = Embedding::find(cs, pic)?;
        let iota = pic
            .elements
            .iter()
            .map(|f| embedding.classify_form(f, cs))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            embedding,
            iota,
            class_count: cs.len(),
        })
    }

    /// P_x = Σ_{ι(y) = x} Ω(y).
    pub fn period_vector(&self, omega: &ClassCharacter) -> Vec<Complex64> {
        let mut p = vec![Complex64::new(0.0, 0.0); self.class_count];
        for (y, &x) in self.iota.iter().enumerate() {
            p[x] += omega.value(y);
        }
        p
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.class_count];
        self.iota
            .iter()
            .all(|&x| !std::mem::replace(&mut seen[x], true))
    }

    pub fn image_size(&self) -> usize {
        let mut seen = vec![false; self.class_count];
        self.iota.iter().for_each(|&x| seen[x] = true);
        seen.iter().filter(|&&s| s).count()
    }
}
