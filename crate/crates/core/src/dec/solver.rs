//! Least-squares primitives and the combinatorial Hodge decomposition.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::cochain::{apply_coboundary, apply_coboundary_transpose, coboundary, Cochain};
use super::complex::SimplicialComplex;
use crate::error::{HopfError, Result};

/// Default relative tolerance on the normal equations.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

/// A linear map given by its action and the action of its transpose.
trait Operator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn apply_t(&self, y: &[f64], out: &mut [f64]);
}

/// `d_k`: `k`-cochains to `(k+1)`-cochains.
struct Coboundary<'a> {
    complex: &'a SimplicialComplex,
    k: usize,
}

impl Operator for Coboundary<'_> {
    fn rows(&self) -> usize {
        self.complex.count(self.k + 1)
    }
    fn cols(&self) -> usize {
        self.complex.count(self.k)
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        apply_coboundary(self.complex, self.k, x, out)
    }
    fn apply_t(&self, y: &[f64], out: &mut [f64]) {
        apply_coboundary_transpose(self.complex, self.k, y, out)
    }
}

/// `d_k^T`: `(k+1)`-cochains to `k`-cochains.
struct Adjoint<'a>(Coboundary<'a>);

impl Operator for Adjoint<'_> {
    fn rows(&self) -> usize {
        self.0.cols()
    }
    fn cols(&self) -> usize {
        self.0.rows()
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.0.apply_t(x, out)
    }
    fn apply_t(&self, y: &[f64], out: &mut [f64]) {
        self.0.apply(y, out)
    }
}

struct LeastSquares {
    x: Vec<f64>,
    /// `|A^T r| / |A^T b|` at exit.
    normal_residual: f64,
    iterations: usize,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// CGLS from a zero start. The iterates stay in the row space of `A`, so the
/// limit is the minimal-norm least-squares solution.
fn cgls(op: &dyn Operator, b: &[f64], tol: f64, max_iterations: usize) -> LeastSquares {
    let (m, n) = (op.rows(), op.cols());
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut s = vec![0.0; n];
    op.apply_t(&r, &mut s);
    let s0 = dot(&s, &s).sqrt();
    if s0 == 0.0 {
        return LeastSquares {
            x,
            normal_residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut p = s.clone();
    let mut q = vec![0.0; m];
    let mut gamma = dot(&s, &s);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        op.apply(&p, &mut q);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= alpha * qi);
        op.apply_t(&r, &mut s);
        let gamma_new = dot(&s, &s);
        if gamma_new.sqrt() <= tol * s0 {
            gamma = gamma_new;
            converged = true;
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        p.iter_mut()
            .zip(&s)
            .for_each(|(pi, si)| *pi = si + beta * *pi);
    }
    LeastSquares {
        x,
        normal_residual: gamma.sqrt() / s0,
        iterations,
        converged,
    }
}

fn default_cap(unknowns: usize) -> usize {
    (10 * unknowns).max(1000)
}

#[derive(Clone, Debug)]
pub struct PrimitiveOptions {
    /// Relative tolerance on the normal equations.
    pub tol: f64,
    /// Reject inputs whose closedness residual exceeds this.
    pub closedness_budget: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl Default for PrimitiveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SOLVER_TOL,
            closedness_budget: None,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Primitive {
    pub omega: Cochain,
    /// `|d omega - eta| / |eta|` (zero for `eta = 0`).
    pub residual: f64,
    pub iterations: usize,
}

/// `|d eta|_M / (1 + |eta|_M)` in the lumped metric norms; zero in top degree.
pub fn closedness(eta: &Cochain) -> Result<f64> {
    if eta.degree() >= eta.complex().dim() {
        return Ok(0.0);
    }
    let d = coboundary(eta)?;
    Ok(d.metric_norm() / (1.0 + eta.metric_norm()))
}

/// Minimal-norm `omega` minimizing `|d omega - eta|`.
pub fn solve_primitive(eta: &Cochain, tol: f64) -> Result<Primitive> {
    solve_primitive_with(
        eta,
        &PrimitiveOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_primitive_with(eta: &Cochain, opts: &PrimitiveOptions) -> Result<Primitive> {
    let k = eta.degree();
    if k == 0 {
        return Err(HopfError::DegreeOutOfRange {
            degree: 0,
            dim: eta.complex().dim(),
        });
    }
    if let Some(budget) = opts.closedness_budget {
        let residual = closedness(eta)?;
        if residual > budget {
            return Err(HopfError::NotClosed { residual, budget });
        }
    }
    let complex = eta.complex().clone();
    let op = Coboundary {
        complex: &complex,
        k: k - 1,
    };
    let cap = opts
        .max_iterations
        .unwrap_or_else(|| default_cap(op.cols()));
    let sol = cgls(&op, eta.values(), opts.tol, cap);
    let omega = Cochain::from_values(complex.clone(), k - 1, sol.x)?;
    let d_omega = coboundary(&omega)?;
    let eta_norm = eta.norm();
    let residual = if eta_norm == 0.0 {
        0.0
    } else {
        d_omega.add_scaled(eta, -1.0)?.norm() / eta_norm
    };
    if !sol.converged {
        return Err(HopfError::PrimitiveNotConverged {
            residual: sol.normal_residual,
            iterations: sol.iterations,
            best: Box::new(omega),
        });
    }
    Ok(Primitive {
        omega,
        residual,
        iterations: sol.iterations,
    })
}

/// Move `omega` within its gauge class: `omega + d beta`.
pub fn gauge_shift(omega: &Cochain, beta: &Cochain) -> Result<Cochain> {
    if beta.degree() + 1 != omega.degree() {
        return Err(HopfError::DimensionMismatch {
            expected: omega.degree() - 1,
            found: beta.degree(),
        });
    }
    omega.add_scaled(&coboundary(beta)?, 1.0)
}

/// `eta = d a + d^T b + h` with `h` in the kernel of the Hodge Laplacian.
#[derive(Clone, Debug)]
pub struct HodgeSplit {
    pub exact_part: Cochain,
    pub coexact_part: Cochain,
    pub harmonic_part: Cochain,
    /// `|eta - (exact + coexact + harmonic)|`.
    pub residual: f64,
}

impl HodgeSplit {
    /// Largest absolute pairwise inner product between the three parts,
    /// relative to the squared norm of their sum.
    pub fn orthogonality_defect(&self) -> f64 {
        let parts = [&self.exact_part, &self.coexact_part, &self.harmonic_part];
        let total: f64 = parts.iter().map(|p| p.norm().powi(2)).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let ip = parts[i].dot(parts[j]).expect("same complex");
                worst = worst.max(ip.abs() / total);
            }
        }
        worst
    }
}

pub fn hodge_decompose(eta: &Cochain, tol: f64) -> Result<HodgeSplit> {
    let k = eta.degree();
    let complex = eta.complex().clone();
    if k == 0 || k > complex.dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree: k,
            dim: complex.dim(),
        });
    }
    let down = Coboundary {
        complex: &complex,
        k: k - 1,
    };
    let sol = cgls(&down, eta.values(), tol, default_cap(down.cols()));
    if !sol.converged {
        return Err(HopfError::PrimitiveNotConverged {
            residual: sol.normal_residual,
            iterations: sol.iterations,
            best: Box::new(Cochain::from_values(complex.clone(), k - 1, sol.x)?),
        });
    }
    let exact = coboundary(&Cochain::from_values(complex.clone(), k - 1, sol.x)?)?;

    let coexact = if k < complex.dim() {
        let up = Adjoint(Coboundary {
            complex: &complex,
            k,
        });
        let sol = cgls(&up, eta.values(), tol, default_cap(up.cols()));
        if !sol.converged {
            return Err(HopfError::PrimitiveNotConverged {
                residual: sol.normal_residual,
                iterations: sol.iterations,
                best: Box::new(Cochain::from_values(complex.clone(), k + 1, sol.x)?),
            });
        }
        let mut vals = vec![0.0; complex.count(k)];
        up.apply(&sol.x, &mut vals);
        Cochain::from_values(complex.clone(), k, vals)?
    } else {
        Cochain::zeros(complex.clone(), k)?
    };

    let harmonic = eta.add_scaled(&exact, -1.0)?.add_scaled(&coexact, -1.0)?;
    let recon = exact
        .add_scaled(&coexact, 1.0)?
        .add_scaled(&harmonic, 1.0)?;
    let residual = recon.add_scaled(eta, -1.0)?.norm();
    Ok(HodgeSplit {
        exact_part: exact,
        coexact_part: coexact,
        harmonic_part: harmonic,
        residual,
    })
}

/// `|d h|` and `|d^T h|` for a `k`-cochain.
pub fn harmonic_defects(h: &Cochain) -> Result<(f64, f64)> {
    let complex = h.complex();
    let k = h.degree();
    let up = if k < complex.dim() {
        coboundary(h)?.norm()
    } else {
        0.0
    };
    let down = if k > 0 {
        let mut out = vec![0.0; complex.count(k - 1)];
        apply_coboundary_transpose(complex, k - 1, h.values(), &mut out);
        out.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        0.0
    };
    Ok((up, down))
}

/// Dimension of the kernel of the combinatorial Hodge Laplacian in degree `k`,
/// by dense eigendecomposition. Meant for small complexes.
pub fn harmonic_dimension(complex: &Arc<SimplicialComplex>, k: usize, tol: f64) -> Result<usize> {
    if k > complex.dim() {
        return Err(HopfError::DegreeOutOfRange {
            degree: k,
            dim: complex.dim(),
        });
    }
    let n = complex.count(k);
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut col = vec![0.0; n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        col.iter_mut().for_each(|v| *v = 0.0);
        if k > 0 {
            let mut tmp = vec![0.0; complex.count(k - 1)];
            apply_coboundary_transpose(complex, k - 1, &e, &mut tmp);
            apply_coboundary(complex, k - 1, &tmp, &mut col);
        }
        if k < complex.dim() {
            let mut tmp = vec![0.0; complex.count(k + 1)];
            apply_coboundary(complex, k, &e, &mut tmp);
            let mut back = vec![0.0; n];
            apply_coboundary_transpose(complex, k, &tmp, &mut back);
            col.iter_mut().zip(&back).for_each(|(c, b)| *c += b);
        }
        for i in 0..n {
            lap[(i, j)] = col[i];
        }
    }
    let eig = SymmetricEigen::new(lap);
    Ok(eig.eigenvalues.iter().filter(|v| v.abs() < tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::complex::build_sphere3_mesh;

    fn s3(level: usize) -> Arc<SimplicialComplex> {
        Arc::new(build_sphere3_mesh(level).unwrap())
    }

    #[test]
    fn exact_input_recovered() {
        let m = s3(2);
        let w0 = Cochain::random(m.clone(), 1, 4).unwrap();
        let eta = coboundary(&w0).unwrap();
        let p = solve_primitive(&eta, 1e-13).unwrap();
        assert!(p.residual <= 1e-10, "residual {}", p.residual);
        let back = coboundary(&p.omega).unwrap();
        assert!(back.add_scaled(&eta, -1.0).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn zero_gives_zero() {
        let m = s3(1);
        let eta = Cochain::zeros(m, 2).unwrap();
        let p = solve_primitive(&eta, 1e-10).unwrap();
        assert_eq!(p.omega.max_abs(), 0.0);
        assert_eq!(p.residual, 0.0);
    }

    #[test]
    fn primitive_is_minimal_norm() {
        // the minimal-norm solution is orthogonal to the kernel of d, which on
        // S^3 is the image of d from 0-cochains
        let m = s3(1);
        let eta = coboundary(&Cochain::random(m.clone(), 1, 8).unwrap()).unwrap();
        let p = solve_primitive(&eta, 1e-13).unwrap();
        let mut proj = vec![0.0; m.count(0)];
        apply_coboundary_transpose(&m, 0, p.omega.values(), &mut proj);
        assert!(proj.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn degree_zero_rejected() {
        let m = s3(0);
        let eta = Cochain::zeros(m, 0).unwrap();
        assert!(solve_primitive(&eta, 1e-10).is_err());
    }

    #[test]
    fn iteration_cap_reports_best() {
        let m = s3(2);
        let eta = coboundary(&Cochain::random(m.clone(), 1, 2).unwrap()).unwrap();
        let err = solve_primitive_with(
            &eta,
            &PrimitiveOptions {
                tol: 1e-14,
                closedness_budget: None,
                max_iterations: Some(3),
            },
        )
        .unwrap_err();
        match err {
            HopfError::PrimitiveNotConverged {
                iterations, best, ..
            } => {
                assert_eq!(iterations, 3);
                assert_eq!(best.degree(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn closedness_gate() {
        let m = s3(1);
        let eta = Cochain::random(m, 2, 1).unwrap();
        let err = solve_primitive_with(
            &eta,
            &PrimitiveOptions {
                closedness_budget: Some(1e-6),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, HopfError::NotClosed { .. }));
    }

    #[test]
    fn hodge_exact_input() {
        let m = s3(1);
        let eta = coboundary(&Cochain::random(m.clone(), 0, 3).unwrap()).unwrap();
        let split = hodge_decompose(&eta, 1e-12).unwrap();
        assert!(split.coexact_part.norm() < 1e-9);
        assert!(split.harmonic_part.norm() < 1e-9);
        assert!(split.residual < 1e-12);
    }

    #[test]
    fn hodge_degree_two_has_no_harmonic_part() {
        let m = s3(1);
        let eta = Cochain::random(m.clone(), 2, 17).unwrap();
        let split = hodge_decompose(&eta, 1e-12).unwrap();
        assert!(split.harmonic_part.norm() < 1e-8 * eta.norm());
        assert!(split.orthogonality_defect() < 1e-8);
    }

    #[test]
    fn hodge_degree_three_harmonic_is_orientation_class() {
        let m = s3(1);
        let eta = Cochain::random(m.clone(), 3, 5).unwrap();
        let split = hodge_decompose(&eta, 1e-12).unwrap();
        let (up, down) = harmonic_defects(&split.harmonic_part).unwrap();
        assert_eq!(up, 0.0);
        assert!(down < 1e-9);
        // the harmonic part is a multiple of the orientation cochain
        let o: Vec<f64> = m.orientation().iter().map(|&s| s as f64).collect();
        let h = split.harmonic_part.values();
        let c = h.iter().zip(&o).map(|(a, b)| a * b).sum::<f64>() / o.len() as f64;
        assert!(h.iter().zip(&o).all(|(a, b)| (a - c * b).abs() < 1e-9));
    }

    #[test]
    fn harmonic_dimensions_of_s3() {
        let m = s3(1);
        assert_eq!(harmonic_dimension(&m, 3, 1e-9).unwrap(), 1);
        assert_eq!(harmonic_dimension(&m, 2, 1e-9).unwrap(), 0);
        assert_eq!(harmonic_dimension(&m, 1, 1e-9).unwrap(), 0);
        assert_eq!(harmonic_dimension(&m, 0, 1e-9).unwrap(), 1);
    }
}
