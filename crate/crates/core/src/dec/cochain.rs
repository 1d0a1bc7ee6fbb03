use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::complex::SimplicialComplex;
use crate::error::{HopfError, Result};

/// A real `k`-cochain: one value per `k`-simplex in stored (increasing) order.
#[derive(Clone, Debug)]
pub struct Cochain {
    complex: Arc<SimplicialComplex>,
    degree: usize,
    values: Vec<f64>,
}

/// Which simplicial product realizes the wedge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CupProduct {
    /// Front face / back face in the global vertex order.
    #[default]
    AlexanderWhitney,
    /// Average of the Alexander-Whitney product over all vertex orders of each
    /// simplex (equivalently over all global orders).
    Symmetrized,
}

impl Cochain {
    pub fn zeros(complex: Arc<SimplicialComplex>, degree: usize) -> Result<Self> {
        check_degree(&complex, degree)?;
        let n = complex.count(degree);
        Ok(Self {
            complex,
            degree,
            values: vec![0.0; n],
        })
    }

    pub fn from_values(
        complex: Arc<SimplicialComplex>,
        degree: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_degree(&complex, degree)?;
        let n = complex.count(degree);
        if values.len() != n {
            return Err(HopfError::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        Ok(Self {
            complex,
            degree,
            values,
        })
    }

    /// Values drawn uniformly from `[-1, 1]`.
    pub fn random(complex: Arc<SimplicialComplex>, degree: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = complex.count(degree);
        let values = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self::from_values(complex, degree, values)
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_complex(&self, other: &Cochain) -> bool {
        Arc::ptr_eq(&self.complex, &other.complex)
    }

    fn check_compatible(&self, other: &Cochain) -> Result<()> {
        if !self.same_complex(other) {
            return Err(HopfError::ComplexMismatch);
        }
        if self.degree != other.degree {
            return Err(HopfError::DimensionMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Cochain, scale: f64) -> Result<Cochain> {
        self.check_compatible(other)?;
        Ok(Cochain {
            complex: self.complex.clone(),
            degree: self.degree,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + scale * b)
                .collect(),
        })
    }

    pub fn scaled(&self, scale: f64) -> Cochain {
        Cochain {
            complex: self.complex.clone(),
            degree: self.degree,
            values: self.values.iter().map(|v| v * scale).collect(),
        }
    }

    pub fn dot(&self, other: &Cochain) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Euclidean norm (identity mass matrix).
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Norm under the lumped metric mass matrix, approximating the `L^2` norm
    /// of the sampled form.
    pub fn metric_norm(&self) -> f64 {
        let w = self.complex.metric_weights(self.degree);
        self.values
            .iter()
            .zip(w)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt()
    }

    /// `(sum |value|^p * vol)^{1/p}` with affine simplex volumes.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let vol = self.complex.volumes(self.degree);
        self.values
            .iter()
            .zip(vol)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Serializable dump `{degree, values}`.
    pub fn to_dump(&self) -> CochainDump {
        CochainDump {
            degree: self.degree,
            values: self.values.clone(),
        }
    }

    pub fn from_dump(complex: Arc<SimplicialComplex>, dump: &CochainDump) -> Result<Self> {
        Self::from_values(complex, dump.degree, dump.values.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CochainDump {
    pub degree: usize,
    pub values: Vec<f64>,
}

fn check_degree(complex: &SimplicialComplex, degree: usize) -> Result<()> {
    if degree > complex.dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree,
            dim: complex.dim(),
        });
    }
    Ok(())
}

/// Exterior derivative: `(dc)(s) = sum_i (-1)^i c(face_i s)`.
pub fn coboundary(c: &Cochain) -> Result<Cochain> {
    let complex = &c.complex;
    let k = c.degree;
    if k >= complex.dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree: k,
            dim: complex.dim(),
        });
    }
    let mut out = vec![0.0; complex.count(k + 1)];
    apply_coboundary(complex, k, &c.values, &mut out);
    Ok(Cochain {
        complex: complex.clone(),
        degree: k + 1,
        values: out,
    })
}

/// `out = d_k x` for a `k`-cochain `x`.
pub(crate) fn apply_coboundary(complex: &SimplicialComplex, k: usize, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = complex
            .faces_of(k + 1, i)
            .iter()
            .enumerate()
            .map(|(j, &f)| {
                if j % 2 == 0 {
                    x[f as usize]
                } else {
                    -x[f as usize]
                }
            })
            .sum();
    }
}

/// `out = d_k^T y` for a `(k+1)`-cochain `y`.
pub(crate) fn apply_coboundary_transpose(
    complex: &SimplicialComplex,
    k: usize,
    y: &[f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (i, &v) in y.iter().enumerate() {
        for (j, &f) in complex.faces_of(k + 1, i).iter().enumerate() {
            if j % 2 == 0 {
                out[f as usize] += v;
            } else {
                out[f as usize] -= v;
            }
        }
    }
}

fn sorted_with_parity(tuple: &mut [u32]) -> f64 {
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..tuple.len() {
        let mut j = i;
        while j > 0 && tuple[j - 1] > tuple[j] {
            tuple.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    sign
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let mut t: Vec<u32> = p.iter().map(|&i| i as u32).collect();
            let s = sorted_with_parity(&mut t);
            (p, s)
        })
        .collect()
}

/// Cup product of a `p`-cochain and a `q`-cochain.
pub fn cup(a: &Cochain, b: &Cochain) -> Result<Cochain> {
    cup_with(a, b, CupProduct::AlexanderWhitney)
}

pub fn cup_with(a: &Cochain, b: &Cochain, variant: CupProduct) -> Result<Cochain> {
    if !a.same_complex(b) {
        return Err(HopfError::ComplexMismatch);
    }
    let complex = &a.complex;
    let (p, q) = (a.degree, b.degree);
    let deg = p + q;
    if deg > complex.dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree: deg,
            dim: complex.dim(),
        });
    }
    let table = complex.simplices(deg);
    let front_table = complex.simplices(p);
    let back_table = complex.simplices(q);
    let mut values = vec![0.0; table.len()];
    match variant {
        CupProduct::AlexanderWhitney => {
            for (i, s) in table.iter().enumerate() {
                let fa = front_table.find(&s[..=p]).expect("front face");
                let fb = back_table.find(&s[p..]).expect("back face");
                values[i] = a.values[fa] * b.values[fb];
            }
        }
        CupProduct::Symmetrized => {
            let perms = permutations(deg + 1);
            let scale = 1.0 / perms.len() as f64;
            let mut ordered = vec![0u32; deg + 1];
            let mut front = vec![0u32; p + 1];
            let mut back = vec![0u32; q + 1];
            for (i, s) in table.iter().enumerate() {
                let mut acc = 0.0;
                for (perm, sign) in &perms {
                    for (slot, &j) in ordered.iter_mut().zip(perm) {
                        *slot = s[j];
                    }
                    front.copy_from_slice(&ordered[..=p]);
                    back.copy_from_slice(&ordered[p..]);
                    let sf = sorted_with_parity(&mut front);
                    let sb = sorted_with_parity(&mut back);
                    let fa = front_table.find(&front).expect("front face");
                    let fb = back_table.find(&back).expect("back face");
                    acc += sign * sf * sb * a.values[fa] * b.values[fb];
                }
                values[i] = acc * scale;
            }
        }
    }
    Ok(Cochain {
        complex: complex.clone(),
        degree: deg,
        values,
    })
}

/// Orientation-signed sum of a top-degree cochain.
pub fn integrate_top(c: &Cochain) -> Result<f64> {
    let complex = &c.complex;
    if c.degree != complex.dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree: c.degree,
            dim: complex.dim(),
        });
    }
    Ok(c.values
        .iter()
        .zip(complex.orientation())
        .map(|(v, &o)| v * o as f64)
        .sum())
}
