use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lowest eigenpair of a real symmetric operator.
#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Restarted Lanczos with full reorthogonalization.
///
/// Each cycle builds a Krylov basis of at most `krylov` vectors and restarts
/// from the lowest Ritz vector until the explicit residual `|Hx - θx|` drops
/// below `tol`. The start vector is drawn from a fixed-seed generator so that
/// every symmetry sector is populated and results are reproducible.
/// Returns `Err` with the best iterate when `max_restarts` cycles are exhausted.
pub fn lanczos_ground(
    dim: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    tol: f64,
    krylov: usize,
    max_restarts: usize,
) -> Result<LanczosResult, LanczosResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let s = norm(&start);
    start.iter_mut().for_each(|x| *x /= s);

    let m_max = krylov.clamp(2, dim.max(2));
    let mut total = 0;
    let mut best: Option<LanczosResult> = None;
    let mut w = vec![0.0; dim];

    for _ in 0..max_restarts.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz = (0.0, Vec::new());

        for j in 0..m_max.min(dim) {
            apply(&basis[j], &mut w);
            total += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = norm(&w);
            let m = alpha.len();
            let check = m == m_max.min(dim) || b < 1e-12 || m.is_multiple_of(8);
            if check {
                ritz = lowest_ritz(&alpha, &beta);
                let estimate = b * ritz.1[m - 1].abs();
                if estimate < 0.1 * tol || b < 1e-12 {
                    break;
                }
            }
            if j + 1 == m_max.min(dim) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        if ritz.1.len() != alpha.len() {
            ritz = lowest_ritz(&alpha, &beta);
        }

        let mut x = vec![0.0; dim];
        for (c, v) in ritz.1.iter().zip(&basis) {
            axpy(*c, v, &mut x);
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        apply(&x, &mut w);
        total += 1;
        let theta = dot(&x, &w);
        axpy(-theta, &x, &mut w);
        let residual = norm(&w);
        let candidate = LanczosResult {
            eigenvalue: theta,
            eigenvector: x.clone(),
            residual,
            iterations: total,
        };
        if residual <= tol {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(candidate);
        }
        start = x;
    }
    Err(best.expect("at least one restart"))
}

fn lowest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (k, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k, *v))
        .expect("non-empty tridiagonal");
    (theta, eig.eigenvectors.column(k).iter().copied().collect())
}
