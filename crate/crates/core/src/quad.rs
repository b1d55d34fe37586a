//! Numerical engine: adaptive Gauss-Kronrod quadrature, Gauss-Hermite and
//! Gauss-Legendre node sets, Brent root bracketing and sub-grid extremum
//! refinement.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_223_520,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    /// One Kronrod-21 panel per input interval, no refinement.
    FixedNode,
    /// Global bisection of the panel with the largest error estimate.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec<T> {
    rel_tol: T,
    abs_tol: T,
    max_subdivisions: usize,
    rule: QuadRule,
}

impl<T: Scalar> QuadSpec<T> {
    pub fn new(rel_tol: T, max_subdivisions: usize, rule: QuadRule) -> Result<Self> {
        if !(rel_tol > T::zero() && rel_tol <= T::lit(1e-2)) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                reason: format!("must lie in (0, 1e-2], got {rel_tol}"),
            });
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            rel_tol,
            abs_tol: T::zero(),
            max_subdivisions,
            rule,
        })
    }

    pub fn adaptive(rel_tol: T) -> Self {
        Self::new(rel_tol, 10_000, QuadRule::Adaptive).expect("valid tolerance")
    }

    /// Absolute floor below which the error is accepted regardless of the
    /// relative tolerance.
    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol.abs();
        self
    }

    pub fn rel_tol(&self) -> T {
        self.rel_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }

    pub fn rule(&self) -> QuadRule {
        self.rule
    }
}

impl<T: Scalar> Default for QuadSpec<T> {
    fn default() -> Self {
        Self::adaptive(T::lit(1e-10))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Scalar> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Panel<T> {}
impl<T: Scalar> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.as_f64().total_cmp(&other.error.as_f64())
    }
}

fn kronrod21<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let centre = T::half() * (a + b);
    let half = T::half() * (b - a);
    let fc = f(centre);
    let mut res_g = T::zero();
    let mut res_k = fc * T::lit(WGK[10]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let wk = T::lit(WGK[j]);
        res_k = res_k + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * T::half();
    let mut res_asc = T::lit(WGK[10]) * (fc - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * h;
    let res_asc = res_asc * h;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let eps = T::epsilon();
    if res_abs > T::min_positive_value() / (T::lit(50.0) * eps) {
        err = err.max(T::lit(50.0) * eps * res_abs);
    }
    Panel {
        a,
        b,
        value,
        error: err,
    }
}

/// Integral of `f` over `[a, b]`.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, spec: &QuadSpec<T>) -> Result<T> {
    if !(a < b) {
        return Err(Error::InvalidParameter {
            name: "interval",
            reason: format!("need a < b, got [{a}, {b}]"),
        });
    }
    integrate_over(f, &[a, b], spec).map(|o| o.value)
}

/// Integral over the union of consecutive intervals `breaks[i]..breaks[i+1]`.
/// Breakpoints seed the adaptive partition; place them at known kinks or
/// to resolve narrow features.
pub fn integrate_over<T: Scalar, F: Fn(T) -> T>(
    f: F,
    breaks: &[T],
    spec: &QuadSpec<T>,
) -> Result<QuadOutcome<T>> {
    if breaks.len() < 2 {
        return Ok(QuadOutcome {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let mut total = T::zero();
    let mut total_err = T::zero();
    for w in breaks.windows(2) {
        if !(w[0] < w[1]) {
            continue;
        }
        let p = kronrod21(&f, w[0], w[1]);
        evaluations += 21;
        total = total + p.value;
        total_err = total_err + p.error;
        heap.push(p);
    }
    if spec.rule == QuadRule::FixedNode {
        return Ok(QuadOutcome {
            value: total,
            error: total_err,
            evaluations,
        });
    }
    let mut splits = 0;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::ToleranceNotReached {
                estimate: total.as_f64(),
                error: total_err.as_f64(),
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = T::half() * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel at machine resolution; its error cannot shrink further
            return Err(Error::ToleranceNotReached {
                estimate: total.as_f64(),
                error: total_err.as_f64(),
            });
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        evaluations += 42;
        splits += 1;
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
        if splits % 64 == 0 {
            // resum to shed accumulated cancellation in the running totals
            total = heap.iter().fold(T::zero(), |s, p| s + p.value);
            total_err = heap.iter().fold(T::zero(), |s, p| s + p.error);
        }
    }
    let value = heap.iter().fold(T::zero(), |s, p| s + p.value);
    let error = heap.iter().fold(T::zero(), |s, p| s + p.error);
    Ok(QuadOutcome {
        value,
        error,
        evaluations,
    })
}

/// Composite trapezoid rule with `n` panels.
pub fn trapezoid<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let n = n.max(1);
    let h = (b - a) / T::from_usize_lossy(n);
    let mut s = (f(a) + f(b)) * T::half();
    for i in 1..n {
        s = s + f(a + h * T::from_usize_lossy(i));
    }
    s * h
}

/// Trapezoid integral of samples on a (possibly non-uniform) grid.
pub fn trapezoid_samples<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.windows(2)
        .zip(y.windows(2))
        .fold(T::zero(), |s, (xs, ys)| {
            s + (xs[1] - xs[0]) * (ys[0] + ys[1]) * T::half()
        })
}

/// Nodes and weights for `∫ e^{-x²} f(x) dx`, ascending in `x`.
///
/// Zeros are bracketed on a fine scan and polished with Brent. Limited
/// to 600 nodes, past which `e^{-x²/2}` at the outer nodes underflows.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!((1..=600).contains(&n), "gauss_hermite supports 1..=600 nodes");
    let nf = n as f64;
    // normalized Hermite function ψ_n and ψ_{n-1}; the e^{-z²/2} factor
    // keeps the recurrence finite for large n
    let eval = |z: f64| {
        let mut p1 = std::f64::consts::PI.powf(-0.25) * (-0.5 * z * z).exp();
        let mut p2 = 0.0;
        for j in 1..=n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        }
        (p1, p2)
    };
    // positive zeros lie below √(2n+1) and are spaced at least π/√(2n+1)
    // apart, so a scan at a quarter of that spacing brackets each one
    let edge = (2.0 * nf + 1.0).sqrt();
    let step = 0.25 * std::f64::consts::PI / edge;
    let mut positive = Vec::with_capacity(n / 2);
    let mut lo = if n % 2 == 1 { 0.5 * step } else { 0.0 };
    let mut f_lo = eval(lo).0;
    while positive.len() < n / 2 && lo < edge + 1.0 {
        let hi = lo + step;
        let f_hi = eval(hi).0;
        if f_lo == 0.0 || f_lo * f_hi < 0.0 {
            let z = find_root(|z| eval(z).0, lo, hi, 1e-15).unwrap_or(0.5 * (lo + hi));
            positive.push(z);
        }
        lo = hi;
        f_lo = f_hi;
    }
    assert_eq!(positive.len(), n / 2, "hermite zero scan missed a root");
    let weight = |z: f64| {
        let pp = (2.0 * nf).sqrt() * eval(z).1;
        let r = (-0.5 * z * z).exp() / pp;
        2.0 * r * r
    };
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for &z in positive.iter().rev() {
        x.push(-z);
        w.push(weight(z));
    }
    if n % 2 == 1 {
        x.push(0.0);
        w.push(weight(0.0));
    }
    for &z in &positive {
        x.push(z);
        w.push(weight(z));
    }
    (x, w)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Hermite nodes and weights for an average over `N(mean, sigma²)`.
pub(crate) fn normal_hermite_nodes<T: Scalar>(mean: T, sigma: T, n: usize) -> Vec<(T, T)> {
    let (x, w) = gauss_hermite(n);
    let norm = std::f64::consts::PI.sqrt();
    x.into_iter()
        .zip(w)
        .filter(|&(_, w)| w > 0.0)
        .map(|(x, w)| (mean + T::SQRT_2() * sigma * T::lit(x), T::lit(w / norm)))
        .collect()
}

const PANEL_ORDER: usize = 8;

/// Composite Gauss-Legendre nodes over `mean ± 8.5 sigma`, weighted by the
/// normal density.
pub(crate) fn normal_legendre_nodes<T: Scalar>(mean: T, sigma: T, panels: usize) -> Vec<(T, T)> {
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let lo = -8.5_f64;
    let width = 17.0 / panels as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut out = Vec::with_capacity(panels * PANEL_ORDER);
    for k in 0..panels {
        let c = lo + (k as f64 + 0.5) * width;
        for (xi, wi) in x.iter().zip(&w) {
            let z = c + 0.5 * width * xi;
            let weight = 0.5 * width * wi * norm * (-0.5 * z * z).exp();
            out.push((mean + sigma * T::lit(z), T::lit(weight)));
        }
    }
    out
}

/// Brent's bracketing root finder. `tol` is the absolute tolerance on the
/// root location.
pub fn find_root<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    let two = T::two();
    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + T::half() * tol;
        let xm = T::half() * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 {
            b + d
        } else {
            b + tol1.copysign(xm)
        };
        fb = f(b);
    }
    Ok(b)
}

fn check_extremum<T: Scalar>(values: &[T], index: usize) -> Result<bool> {
    if index == 0 || index + 1 >= values.len() {
        return Err(Error::NotAnExtremum(index));
    }
    let (l, c, r) = (values[index - 1], values[index], values[index + 1]);
    if c >= l && c >= r {
        Ok(true)
    } else if c <= l && c <= r {
        Ok(false)
    } else {
        Err(Error::NotAnExtremum(index))
    }
}

/// Parabolic refinement of a sampled extremum on a uniform grid.
///
/// Returns `(location, value)` with the location as a fractional sample
/// index.
pub fn refine_extremum<T: Scalar>(values: &[T], index: usize) -> Result<(T, T)> {
    check_extremum(values, index)?;
    let (l, c, r) = (values[index - 1], values[index], values[index + 1]);
    let curv = l - T::two() * c + r;
    let at = T::from_usize_lossy(index);
    if curv == T::zero() {
        return Ok((at, c));
    }
    let offset = T::half() * (l - r) / curv;
    let value = c - T::lit(0.25) * (l - r) * offset;
    Ok((at + offset, value))
}

/// Extremum of the quartic through the five samples around `index`,
/// starting from the parabolic vertex. Falls back to the parabola next to
/// the ends of the sample range.
pub fn refine_extremum_quartic<T: Scalar>(values: &[T], index: usize) -> Result<(T, T)> {
    let (loc, val) = refine_extremum(values, index)?;
    if index < 2 || index + 2 >= values.len() {
        return Ok((loc, val));
    }
    let [a, b, c, d, e] = [
        values[index - 2],
        values[index - 1],
        values[index],
        values[index + 1],
        values[index + 2],
    ];
    let k = |x: f64| T::lit(x);
    let c1 = (a - k(8.0) * b + k(8.0) * d - e) / k(12.0);
    let c2 = (-a + k(16.0) * b - k(30.0) * c + k(16.0) * d - e) / k(24.0);
    let c3 = (-a + k(2.0) * b - k(2.0) * d + e) / k(12.0);
    let c4 = (a - k(4.0) * b + k(6.0) * c - k(4.0) * d + e) / k(24.0);
    let poly = |s: T| c + s * (c1 + s * (c2 + s * (c3 + s * c4)));
    let mut s = loc - T::from_usize_lossy(index);
    for _ in 0..50 {
        let d1 = c1 + s * (k(2.0) * c2 + s * (k(3.0) * c3 + s * k(4.0) * c4));
        let d2 = k(2.0) * c2 + s * (k(6.0) * c3 + s * k(12.0) * c4);
        if d2 == T::zero() {
            break;
        }
        let step = d1 / d2;
        s = (s - step).max(-T::one()).min(T::one());
        if step.abs() < T::lit(1e-15) {
            break;
        }
    }
    Ok((T::from_usize_lossy(index) + s, poly(s)))
}
