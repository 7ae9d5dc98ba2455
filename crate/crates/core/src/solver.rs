//! Sparse direct solution of the bordered saddle-point system.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};
use log::{debug, warn};

use crate::assembly::SaddleSystem;
use crate::error::{Error, Result};
use crate::spaces::DiscreteField;
use crate::sparse::CsrMatrix;
use crate::Real;

/// Relative residual accepted from the direct solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
const REFINEMENT_STEPS: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    /// Velocity over all unknowns (boundary values included) and pressure.
    pub field: DiscreteField<T>,
    /// Multiplier of the pressure constraint.
    pub multiplier: T,
    /// Max-norm of the residual of the bordered system.
    pub residual_norm: T,
}

fn to_faer<T: Real>(n: usize, entries: &[(usize, usize, T)]) -> Result<SparseColMat<usize, T>> {
    let triplets: Vec<_> = entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularSystem(format!("could not build sparse matrix: {e:?}")))
}

/// Entries of the unbordered saddle matrix with pressure unknown `pin`
/// replaced by the identity. Constant pressures span its kernel, so pinning
/// one of them leaves a regular matrix while keeping the sparsity; the dense
/// constraint row would otherwise ruin the fill of the factorization.
fn pinned_entries<T: Real>(sys: &SaddleSystem<T>, pin: usize) -> Vec<(usize, usize, T)> {
    let nf = sys.n_free();
    let pinned = nf + pin;
    let mut out = Vec::with_capacity(sys.a.nnz() + 2 * sys.b.nnz() + sys.j_p.nnz() + 1);
    out.extend(sys.a.triplets());
    for (r, c, v) in sys.b.triplets() {
        if nf + r != pinned {
            out.push((c, nf + r, v));
            out.push((nf + r, c, -v));
        }
    }
    out.extend(sys.j_p.triplets().map(|(r, c, v)| (nf + r, nf + c, v)).filter(|&(r, c, _)| r != pinned && c != pinned));
    out.push((pinned, pinned, T::one()));
    out
}

fn column<T: Real>(v: &[T]) -> Mat<T> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn residual<T: Real>(sys: &SaddleSystem<T>, rhs: &[T], x: &[T]) -> Vec<T> {
    let ax = sys.apply(x);
    rhs.iter().zip(ax).map(|(&b, y)| b - y).collect()
}

/// Solves the bordered system by sparse LU with partial pivoting.
///
/// Summing the pressure rows eliminates everything but the multiplier,
/// which fixes it; the remaining system is solved with one pressure pinned
/// and the pressure is then shifted onto the constraint. The result is
/// checked against the full bordered system. Factorization runs
/// sequentially so repeated solves are bitwise identical. A rank-deficient
/// system is reported as [`Error::SingularSystem`].
pub fn solve<T: Real>(sys: &SaddleSystem<T>) -> Result<Solution<T>> {
    faer::set_global_parallelism(Par::Seq);
    let (nf, np) = (sys.n_free(), sys.n_p());
    let n = sys.size();
    let rhs = sys.rhs();
    let c_sum = sys.c.iter().fold(T::zero(), |a, &c| a + c);
    if np == 0 || !(c_sum > T::zero()) {
        return Err(Error::SingularSystem("pressure constraint has no positive weight".into()));
    }
    let pin = 0;
    let matrix = to_faer(n - 1, &pinned_entries(sys, pin))?;
    let lu = matrix.sp_lu().map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e:?}")))?;

    let solve_col = |b: &[T]| -> Vec<T> {
        let x = lu.solve(&column(b));
        (0..n - 1).map(|i| x[(i, 0)]).collect()
    };
    // Maps a bordered right-hand side to a solution of the bordered system.
    let bordered_solve = |b: &[T]| -> Vec<T> {
        let lambda = b[nf..nf + np].iter().fold(T::zero(), |a, &v| a + v) / c_sum;
        let mut r: Vec<T> = b[..n - 1].to_vec();
        for (ri, &ci) in r[nf..].iter_mut().zip(&sys.c) {
            *ri -= ci * lambda;
        }
        r[nf + pin] = T::zero();
        let mut x = solve_col(&r);
        let shift = (sys.c.iter().zip(&x[nf..]).fold(T::zero(), |a, (&c, &p)| a + c * p) - b[n - 1]) / c_sum;
        for p in &mut x[nf..] {
            *p -= shift;
        }
        x.push(lambda);
        x
    };
    let mut x = bordered_solve(&rhs);
    let tolerance = T::lit(RESIDUAL_TOLERANCE) * (T::one() + sys.max_entry());
    let mut r = residual(sys, &rhs, &x);
    let mut res = max_norm(&r);
    for step in 0..REFINEMENT_STEPS {
        if res <= tolerance || !res.is_finite() {
            break;
        }
        debug!("refinement step {step}: residual {res}");
        let dx = bordered_solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        r = residual(sys, &rhs, &x);
        res = max_norm(&r);
    }
    if !res.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem(format!("direct solve of order {n} produced non-finite values")));
    }
    if res > tolerance {
        warn!("residual {res} exceeds {tolerance}");
        return Err(Error::SingularSystem(format!(
            "residual {res} of the order-{n} system exceeds {tolerance}; the matrix is numerically singular"
        )));
    }

    let (nf, np) = (sys.n_free(), sys.n_p());
    let mut velocity = sys.dirichlet_values.clone();
    for (i, &g) in sys.free.iter().enumerate() {
        velocity[g] = x[i];
    }
    let pressure = x[nf..nf + np].to_vec();
    Ok(Solution { field: DiscreteField { velocity, pressure }, multiplier: x[nf + np], residual_norm: res })
}

/// Whether the symmetric matrix admits a Cholesky factorization, i.e. is
/// numerically positive definite.
pub fn is_positive_definite<T: Real>(a: &CsrMatrix<T>) -> Result<bool> {
    let m = to_faer(a.nrows(), &a.triplets().collect::<Vec<_>>())?;
    Ok(m.sp_cholesky(faer::Side::Lower).is_ok())
}

/// Estimate of the smallest eigenvalue of a symmetric positive definite
/// matrix by inverse iteration with a Rayleigh quotient. Returns
/// [`Error::SingularSystem`] if the matrix is not positive definite.
pub fn smallest_eigenvalue<T: Real>(a: &CsrMatrix<T>, iterations: usize) -> Result<T> {
    faer::set_global_parallelism(Par::Seq);
    let n = a.nrows();
    let m = to_faer(n, &a.triplets().collect::<Vec<_>>())?;
    let llt = m
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::SingularSystem(format!("matrix is not positive definite: {e:?}")))?;
    // Deterministic start vector with components along every direction.
    let mut v: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.5) * T::from_count(i % 7) / T::lit(7.0)).collect();
    let normalize = |v: &mut Vec<T>| {
        let s = v.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt();
        for x in v.iter_mut() {
            *x /= s;
        }
    };
    normalize(&mut v);
    for _ in 0..iterations {
        let w = llt.solve(&column(&v));
        v = (0..n).map(|i| w[(i, 0)]).collect();
        normalize(&mut v);
    }
    let lambda = a.bilinear(&v, &v);
    debug!("smallest eigenvalue estimate {lambda}");
    Ok(lambda)
}
