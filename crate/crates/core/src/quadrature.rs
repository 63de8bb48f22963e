//! Quadrature building blocks shared by the kernel, spectrum and engine modules.
//!
//! * adaptive Gauss–Kronrod (10/21) integration of complex integrands,
//! * Gauss–Legendre nodes and the matching indefinite-integration matrix used by
//!   the cascade evaluator,
//! * Wynn's epsilon algorithm for accelerating partial sums of improper integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_983_376,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// One Gauss–Kronrod 21-point panel.
#[derive(Debug, Clone, Copy)]
pub struct RuleEstimate {
    pub value: Complex64,
    pub error: f64,
    /// Integral of |integrand| over the panel, used for round-off floors.
    pub abs_value: f64,
}

pub fn gauss_kronrod21<F>(f: &mut F, a: f64, b: f64) -> RuleEstimate
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_value = fc.norm() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += (f1 + f2) * WGK[j];
        abs_value += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let abs_value = abs_value * half.abs();
    let raw = ((kronrod - gauss) * half).norm();
    let floor = 50.0 * f64::EPSILON * abs_value;
    RuleEstimate {
        value,
        error: raw.max(floor),
        abs_value,
    }
}

const MAX_DEPTH: u32 = 48;

/// Adaptive bisection on top of [`gauss_kronrod21`].
///
/// `tol` is an absolute tolerance for the whole interval; sub-intervals get a
/// share proportional to their length.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<RuleEstimate>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_mut(&mut f, a, b, tol)
}

pub fn integrate_mut<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<RuleEstimate>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(RuleEstimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            abs_value: 0.0,
        });
    }
    let total = (b - a).abs();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut abs_value = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let est = gauss_kronrod21(f, lo, hi);
        let share = tol * (hi - lo).abs() / total;
        if est.error <= share || est.error <= 1e3 * f64::EPSILON * est.abs_value {
            value += est.value;
            error += est.error;
            abs_value += est.abs_value;
            continue;
        }
        if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailed { a: lo, b: hi });
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    Ok(RuleEstimate {
        value,
        error,
        abs_value,
    })
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    Ok(integrate(|t| Complex64::new(f(t), 0.0), a, b, tol)?.value.re)
}

/// Legendre polynomial values `P_0(x) ..= P_n(x)`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 1..n {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let p = legendre_all(n, x);
            let dp = nf * (x * p[n] - p[n - 1]) / (x * x - 1.0);
            let dx = p[n] / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let p = legendre_all(n, x);
        let dp = nf * (x * p[n] - p[n - 1]) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule together with the indefinite-integration matrix
/// `S[q][p] = ∫_{-1}^{x_q} ℓ_p(x) dx` of its Lagrange basis.
#[derive(Debug, Clone)]
pub struct SpectralRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub integration: Vec<Vec<f64>>,
}

impl SpectralRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let legendre: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let mut integration = vec![vec![0.0; n]; n];
        for q in 0..n {
            let pq = &legendre[q];
            for p in 0..n {
                let pp = &legendre[p];
                let mut acc = 0.5 * (nodes[q] + 1.0);
                for k in 1..n {
                    acc += 0.5 * pp[k] * (pq[k + 1] - pq[k - 1]);
                }
                integration[q][p] = weights[p] * acc;
            }
        }
        Self {
            nodes,
            weights,
            integration,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Wynn's epsilon algorithm; returns the deepest even-column estimate.
///
/// Returns `None` for fewer than three terms.
pub fn wynn_epsilon(partial_sums: &[Complex64]) -> Option<Complex64> {
    let n = partial_sums.len();
    if n < 3 {
        return None;
    }
    // prev = ε_{k-1}, cur = ε_k, both indexed by position.
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff.norm() <= 1e-300 || !diff.re.is_finite() || !diff.im.is_finite() {
                return Some(best);
            }
            next.push(prev[i + 1] + diff.inv());
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            let candidate = *cur.last().unwrap();
            if !(candidate.re.is_finite() && candidate.im.is_finite()) {
                return Some(best);
            }
            best = candidate;
        }
    }
    Some(best)
}
