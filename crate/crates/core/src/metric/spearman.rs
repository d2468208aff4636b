use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpearmanError {
    #[error("length mismatch: {xs} vs {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("need at least 3 pairs, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: all ranks tied on one side")]
    ZeroVariance,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
}

/// 1-based ranks; tied values share the average of their positions.
pub fn mid_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // Positions i..j (0-based) average to (i + 1 + j) / 2 in 1-based terms.
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn check(xs: &[f64], ys: &[f64]) -> Result<(), SpearmanError> {
    if xs.len() != ys.len() {
        return Err(SpearmanError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(SpearmanError::TooFew(xs.len()));
    }
    if let Some(i) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(SpearmanError::NonFinite(i % xs.len()));
    }
    Ok(())
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64, SpearmanError> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Err(SpearmanError::ZeroVariance);
    }
    // One square root of the product keeps rho(x, x) at exactly 1.
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

fn rank_rho(xs: &[f64], ys: &[f64]) -> Result<f64, SpearmanError> {
    pearson(&mid_ranks(xs), &mid_ranks(ys))
}

/// Two-sided p-value of `rho` over `n` pairs from the Student-t
/// approximation with `n - 2` degrees of freedom.
pub fn t_test_p(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Spearman rank correlation with a t-approximation p-value.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Correlation, SpearmanError> {
    check(xs, ys)?;
    let rho = rank_rho(xs, ys)?;
    Ok(Correlation {
        rho,
        p: t_test_p(rho, xs.len()),
        n: xs.len(),
    })
}

/// Spearman correlation with a seeded permutation p-value:
/// `(1 + #{|rho_perm| >= |rho|}) / (1 + permutations)`.
pub fn spearman_permutation(
    xs: &[f64],
    ys: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<Correlation, SpearmanError> {
    check(xs, ys)?;
    let rx = mid_ranks(xs);
    let mut ry = mid_ranks(ys);
    let rho = pearson(&rx, &ry)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        ry.shuffle(&mut rng);
        let r = pearson(&rx, &ry)?;
        // Tolerance for floating noise among equal statistics.
        if r.abs() >= rho.abs() - 1e-12 {
            extreme += 1;
        }
    }
    Ok(Correlation {
        rho,
        p: (1 + extreme) as f64 / (1 + permutations) as f64,
        n: xs.len(),
    })
}
