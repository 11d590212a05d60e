//! Shared test oracles, implemented independently of the library code they
//! check: quadrature-based normal CDF, golden-section likelihood search,
//! distribution-free band widths, and small-sample critical values.

#![allow(dead_code)]

use geomrec::estimators::normal_quantile;

// =============================================================
// Normal distribution oracles
// =============================================================

/// Standard normal CDF by composite Simpson quadrature of the density from
/// 0 to |x| (absolute error far below 1e-12 for |x| <= 10).
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_cdf_quadrature(-x);
    }
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let n = 4000; // even
    let h = x / n as f64;
    let mut acc = density(0.0) + density(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * density(i as f64 * h);
    }
    0.5 + acc * h / 3.0
}

/// Normal quantile by bisection on the quadrature CDF.
pub fn normal_quantile_bisection(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-12.0_f64, 12.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_quadrature(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// =============================================================
// Likelihood search oracle
// =============================================================

/// Log-likelihood of the reduced statistics as a function of the tail index:
/// with `beta = delta^(gamma/m)`, it is `c * ln(beta) + d * ln(1 - beta)`
/// where `c` counts the geometric-law "failures" and `d` the "successes".
pub fn reduced_log_likelihood(gamma: f64, delta: f64, m: u32, c: f64, d: f64) -> f64 {
    let beta = delta.powf(gamma / f64::from(m));
    c * beta.ln() + d * (1.0 - beta).ln()
}

/// Golden-section maximizer of a unimodal function on `[lo, hi]`.
pub fn golden_section_max(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_8;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

// =============================================================
// Distribution-free statistics
// =============================================================

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz confidence band:
/// `sqrt(ln(2 / alpha) / (2 n))`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F1 - F2|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xb.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS critical value at significance `alpha`:
/// `c(alpha) * sqrt((n + m) / (n m))` with `c = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Chi-square upper critical value by the Wilson–Hilferty cube approximation
/// (relative error well under a percent for the degrees of freedom used in
/// these tests).
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    let z = normal_quantile(1.0 - alpha).expect("alpha in range");
    let k = df as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi2_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum()
}

/// Pearson chi-square statistic of independence for a contingency table,
/// returning `(statistic, degrees_of_freedom)`.
pub fn contingency_chi2(table: &[Vec<f64>]) -> (f64, usize) {
    let rows = table.len();
    let cols = table[0].len();
    let total: f64 = table.iter().flatten().sum();
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let mut stat = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let e = row_sums[i] * col_sums[j] / total;
            if e > 0.0 {
                let d = table[i][j] - e;
                stat += d * d / e;
            }
        }
    }
    (stat, (rows - 1) * (cols - 1))
}

// =============================================================
// Student t oracles (for the absolute-t sampler)
// =============================================================

/// CDF of the Student t distribution with 1 degree of freedom (Cauchy).
pub fn t1_cdf(x: f64) -> f64 {
    0.5 + x.atan() / std::f64::consts::PI
}

/// CDF of the Student t distribution with 3 degrees of freedom, in its
/// elementary closed form.
pub fn t3_cdf(x: f64) -> f64 {
    let s = x / 3.0_f64.sqrt();
    0.5 + (s / (1.0 + s * s) + s.atan()) / std::f64::consts::PI
}

/// Survival of |T_nu| for nu in {1, 3}: `2 (1 - F_nu(x))` for `x >= 0`.
pub fn abs_t_survival(nu: u32, x: f64) -> f64 {
    let cdf = match nu {
        1 => t1_cdf(x),
        3 => t3_cdf(x),
        other => panic!("no elementary t CDF oracle for nu = {other}"),
    };
    2.0 * (1.0 - cdf)
}

/// Lower median used by the aggregation: element `(len - 1) / 2` when sorted.
pub fn lower_median_f64(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[(values.len() - 1) / 2]
}
