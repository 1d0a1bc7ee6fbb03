use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};

/// Smooth maps defined on a unit sphere, evaluated in closed form.
///
/// Every map is composed with the radial retraction `x -> x/|x|`, so it can be
/// sampled on sphere meshes and, unchanged, on cone meshes over them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinMap {
    Constant {
        value: Vec<f64>,
        domain_dim: usize,
    },
    /// `A . h` with `h(z_1, z_2) = (2 z_1 conj(z_2), |z_1|^2 - |z_2|^2)` on
    /// `S^3 in C^2`, for a linear `A` given by rows.
    Hopf {
        post: [[f64; 3]; 3],
    },
    /// The inclusion `S^{d-1} -> R^d`.
    Inclusion {
        dim: usize,
    },
    /// `y -> (y_1, y_2, y_3) + amplitude * sin(M^T y)` on `S^3`; generically of
    /// full rank 3, so it does not factor through `S^2`.
    FullRank {
        mix: [[f64; 3]; 4],
        amplitude: f64,
    },
    /// `(1 - s) from + s to`.
    Blend {
        s: f64,
        from: Box<BuiltinMap>,
        to: Box<BuiltinMap>,
    },
}

const IDENTITY3: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Rotation of `R^3` about the z-axis.
pub fn z_rotation(angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn mat3(a: &[[f64; 3]; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |r, c| a[r][c])
}

impl BuiltinMap {
    pub fn hopf() -> Self {
        Self::Hopf { post: IDENTITY3 }
    }

    pub fn hopf_rotated(angle: f64) -> Self {
        Self::Hopf {
            post: z_rotation(angle),
        }
    }

    /// Hopf map followed by the reflection `z -> -z` of `S^2`.
    pub fn hopf_reflected() -> Self {
        Self::Hopf {
            post: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
        }
    }

    pub fn constant(value: Vec<f64>, domain_dim: usize) -> Self {
        Self::Constant { value, domain_dim }
    }

    pub fn full_rank_control(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mix = [[0.0; 3]; 4];
        for row in &mut mix {
            for m in row.iter_mut() {
                *m = rng.gen_range(-2.0..2.0);
            }
        }
        Self::FullRank {
            mix,
            amplitude: 0.2,
        }
    }

    pub fn blend(s: f64, from: BuiltinMap, to: BuiltinMap) -> Result<Self> {
        if from.domain_dim() != to.domain_dim() || from.codim() != to.codim() {
            return Err(HopfError::Precondition(
                "blended maps need matching domain and codomain".into(),
            ));
        }
        Ok(Self::Blend {
            s,
            from: Box::new(from),
            to: Box::new(to),
        })
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            Self::Constant { domain_dim, .. } => *domain_dim,
            Self::Hopf { .. } | Self::FullRank { .. } => 4,
            Self::Inclusion { dim } => *dim,
            Self::Blend { from, .. } => from.domain_dim(),
        }
    }

    pub fn codim(&self) -> usize {
        match self {
            Self::Constant { value, .. } => value.len(),
            Self::Hopf { .. } | Self::FullRank { .. } => 3,
            Self::Inclusion { dim } => *dim,
            Self::Blend { from, .. } => from.codim(),
        }
    }

    /// The linear factor `A` when the map is `A . h`.
    pub fn hopf_post(&self) -> Option<[[f64; 3]; 3]> {
        match self {
            Self::Hopf { post } => Some(*post),
            _ => None,
        }
    }

    /// Value at a point `y` of the unit sphere.
    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Self::Constant { value, .. } => value.clone(),
            Self::Hopf { post } => {
                let h = [
                    2.0 * (y[0] * y[2] + y[1] * y[3]),
                    2.0 * (y[1] * y[2] - y[0] * y[3]),
                    y[0] * y[0] + y[1] * y[1] - y[2] * y[2] - y[3] * y[3],
                ];
                post.iter()
                    .map(|row| row.iter().zip(&h).map(|(a, b)| a * b).sum())
                    .collect()
            }
            Self::Inclusion { .. } => y.to_vec(),
            Self::FullRank { mix, amplitude } => (0..3)
                .map(|i| {
                    let phase: f64 = (0..4).map(|j| y[j] * mix[j][i]).sum();
                    y[i] + amplitude * phase.sin()
                })
                .collect(),
            Self::Blend { s, from, to } => from
                .eval(y)
                .iter()
                .zip(to.eval(y))
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
        }
    }

    /// Jacobian (`codim x domain_dim`) at a point `y` of the unit sphere, of
    /// the formula extended to the ambient space.
    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        match self {
            Self::Constant { value, domain_dim } => DMatrix::zeros(value.len(), *domain_dim),
            Self::Hopf { post } => {
                let (a, b, c, d) = (y[0], y[1], y[2], y[3]);
                #[rustfmt::skip]
                let jh = DMatrix::from_row_slice(3, 4, &[
                    2.0 * c, 2.0 * d, 2.0 * a, 2.0 * b,
                    -2.0 * d, 2.0 * c, 2.0 * b, -2.0 * a,
                    2.0 * a, 2.0 * b, -2.0 * c, -2.0 * d,
                ]);
                mat3(post) * jh
            }
            Self::Inclusion { dim } => DMatrix::identity(*dim, *dim),
            Self::FullRank { mix, amplitude } => DMatrix::from_fn(3, 4, |i, j| {
                let phase: f64 = (0..4).map(|k| y[k] * mix[k][i]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                id + amplitude * phase.cos() * mix[j][i]
            }),
            Self::Blend { s, from, to } => from.jacobian(y) * (1.0 - s) + to.jacobian(y) * *s,
        }
    }

    /// `f(x/|x|)`; the origin is sent to the value at the first basis vector.
    pub fn eval_radial(&self, x: &[f64]) -> Vec<f64> {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            let mut e = vec![0.0; x.len()];
            e[0] = 1.0;
            return self.eval(&e);
        }
        let y: Vec<f64> = x.iter().map(|c| c / r).collect();
        self.eval(&y)
    }

    /// Jacobian of `x -> f(x/|x|)`, undefined near the origin.
    pub fn jacobian_radial(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r < 1e-12 {
            return None;
        }
        let d = x.len();
        let y: Vec<f64> = x.iter().map(|c| c / r).collect();
        let proj = DMatrix::from_fn(d, d, |i, j| {
            (if i == j { 1.0 } else { 0.0 } - y[i] * y[j]) / r
        });
        Some(self.jacobian(&y) * proj)
    }

    /// `A . f` when it is again a builtin.
    pub fn post_composed(&self, a: &DMatrix<f64>) -> Option<Self> {
        match self {
            Self::Hopf { post } if a.shape() == (3, 3) => {
                let p = a * mat3(post);
                Some(Self::Hopf {
                    post: std::array::from_fn(|r| std::array::from_fn(|c| p[(r, c)])),
                })
            }
            Self::Constant { value, domain_dim } if a.ncols() == value.len() => {
                let v = a * nalgebra::DVector::from_column_slice(value);
                Some(Self::Constant {
                    value: v.iter().copied().collect(),
                    domain_dim: *domain_dim,
                })
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_points() -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..50)
            .map(|_| {
                let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                v.iter().map(|c| c / n).collect()
            })
            .collect()
    }

    #[test]
    fn hopf_values() {
        let h = BuiltinMap::hopf();
        assert_eq!(h.eval(&[1.0, 0.0, 0.0, 0.0]), vec![0.0, 0.0, 1.0]);
        for y in sphere_points() {
            let v = h.eval(&y);
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let maps = [
            BuiltinMap::hopf_rotated(0.3),
            BuiltinMap::full_rank_control(5),
            BuiltinMap::blend(0.4, BuiltinMap::hopf(), BuiltinMap::full_rank_control(1)).unwrap(),
        ];
        let eps = 1e-6;
        for f in &maps {
            for y in sphere_points().iter().take(5) {
                let x: Vec<f64> = y.iter().map(|c| 1.3 * c).collect();
                let j = f.jacobian_radial(&x).unwrap();
                for k in 0..4 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += eps;
                    xm[k] -= eps;
                    let (fp, fm) = (f.eval_radial(&xp), f.eval_radial(&xm));
                    for i in 0..3 {
                        let fd = (fp[i] - fm[i]) / (2.0 * eps);
                        assert!((fd - j[(i, k)]).abs() < 1e-7, "{f:?} {i} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn hopf_differential_has_rank_two_on_the_sphere() {
        let h = BuiltinMap::hopf();
        for y in sphere_points() {
            let sv = h
                .jacobian_radial(&y)
                .unwrap()
                .svd(false, false)
                .singular_values;
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            assert!((s[0] - 2.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
            assert!(s[2] < 1e-12);
        }
    }

    #[test]
    fn control_has_full_rank() {
        let f = BuiltinMap::full_rank_control(1);
        let full = sphere_points()
            .iter()
            .filter(|y| {
                let sv = f
                    .jacobian_radial(y)
                    .unwrap()
                    .svd(false, false)
                    .singular_values;
                sv.min() > 0.05 * sv.max()
            })
            .count();
        assert!(full > 40);
    }

    #[test]
    fn origin_goes_to_first_basis_vector() {
        let h = BuiltinMap::hopf();
        assert_eq!(h.eval_radial(&[0.0; 4]), h.eval(&[1.0, 0.0, 0.0, 0.0]));
        assert!(h.jacobian_radial(&[0.0; 4]).is_none());
    }
}
