//! Finite Hilbert transform on (-1,1).
//!
//! `T f(x) = (1/pi) PV int_{-1}^{1} f(y)/(x-y) dy`
//!
//! Functions are sampled at the Chebyshev-Gauss nodes `x_k = cos((2k+1)pi/2N)`
//! and carry a weight class; the endpoint factor is kept symbolic. The
//! transform acts on the Chebyshev expansion of the smooth part through the
//! basis identities
//!
//! ```text
//! T[sqrt(1-y^2) U_{n-1}] = T_n
//! T[T_n / sqrt(1-y^2)]   = -U_{n-1},  n >= 1,   T[1/sqrt(1-y^2)] = 0
//! T[T_n]                 = -(1/pi) I_n(x) + T_n(x) ln((1+x)/(1-x)) / pi
//! ```
//!
//! with `I_n(x) = int (T_n(x)-T_n(y))/(x-y) dy` generated by a three-term
//! recurrence.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances;

pub const MIN_NODES: usize = 8;

/// Endpoint factor multiplying the sampled smooth part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightClass {
    Smooth,
    /// carries `1/sqrt(1-x^2)`
    InvSqrt,
    /// carries `sqrt(1-x^2)`
    Sqrt,
}

impl WeightClass {
    pub fn factor(self, x: f64) -> f64 {
        match self {
            WeightClass::Smooth => 1.0,
            WeightClass::InvSqrt => 1.0 / (1.0 - x * x).sqrt(),
            WeightClass::Sqrt => (1.0 - x * x).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightClass::Smooth => "smooth",
            WeightClass::InvSqrt => "inv_sqrt",
            WeightClass::Sqrt => "sqrt",
        }
    }
}

/// Chebyshev-Gauss nodes, descending from near 1 to near -1.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| node_angle(n, k).cos()).collect()
}

fn node_angle(n: usize, k: usize) -> f64 {
    (2 * k + 1) as f64 * PI / (2 * n) as f64
}

/// Samples of the smooth part of a function on (-1,1) at Chebyshev-Gauss
/// nodes, tagged with its endpoint weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebFunction {
    values: Vec<Complex64>,
    weight: WeightClass,
}

impl ChebFunction {
    pub fn new(values: Vec<Complex64>, weight: WeightClass) -> Result<Self> {
        if values.len() < MIN_NODES {
            return Err(Error::TooFewNodes(values.len()));
        }
        if let Some(k) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self { values, weight })
    }

    pub fn from_real(values: &[f64], weight: WeightClass) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), weight)
    }

    /// Samples `smooth(x_k)`; the function represented is `weight(x) * smooth(x)`.
    pub fn from_fn(n: usize, weight: WeightClass, smooth: impl Fn(f64) -> f64) -> Result<Self> {
        let v: Vec<f64> = nodes(n).into_iter().map(smooth).collect();
        Self::from_real(&v, weight)
    }

    pub fn from_complex_fn(
        n: usize,
        weight: WeightClass,
        smooth: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        Self::new(nodes(n).into_iter().map(smooth).collect(), weight)
    }

    pub fn zeros(n: usize, weight: WeightClass) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], weight)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn weight_class(&self) -> WeightClass {
        self.weight
    }

    /// Samples of the smooth part.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn nodes(&self) -> Vec<f64> {
        nodes(self.n())
    }

    /// Values of the full function (weight applied) at the nodes.
    pub fn point_values(&self) -> Vec<Complex64> {
        self.nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, v)| v * self.weight.factor(x))
            .collect()
    }

    pub fn comparable(&self, other: &ChebFunction) -> bool {
        self.n() == other.n() && self.weight == other.weight
    }

    fn check_comparable(&self, other: &ChebFunction) -> Result<()> {
        if self.comparable(other) {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "N {} / {}, weight {} / {}",
                self.n(),
                other.n(),
                self.weight.name(),
                other.weight.name()
            )))
        }
    }

    /// `a*self + b*other`.
    pub fn combine(&self, a: Complex64, other: &ChebFunction, b: Complex64) -> Result<Self> {
        self.check_comparable(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { values, weight: self.weight })
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| a * v).collect(), weight: self.weight }
    }

    /// Max abs difference of smooth-part samples.
    pub fn max_diff(&self, other: &ChebFunction) -> Result<f64> {
        self.check_comparable(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Chebyshev coefficients `a_n` of the smooth part, `s = sum a_n T_n`.
    pub fn chebyshev_coefficients(&self) -> Vec<Complex64> {
        chebyshev_coefficients(&self.values)
    }

    /// `int_{-1}^{1} f(x) dx` of the full function by Gauss-Chebyshev
    /// quadrature; exact for polynomial smooth parts of classes sqrt and
    /// inv_sqrt.
    pub fn integral(&self) -> Complex64 {
        let n = self.n();
        let w = PI / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in self.values.iter().enumerate() {
            let s = node_angle(n, k).sin();
            acc += v * match self.weight {
                WeightClass::Smooth => s,
                WeightClass::InvSqrt => 1.0,
                WeightClass::Sqrt => s * s,
            };
        }
        acc * w
    }

    /// Null-space coefficient that reproduces this function under the
    /// Tricomi inverse of its transform: `(1/pi) int f dx`.
    pub fn null_coefficient(&self) -> Complex64 {
        self.integral() / PI
    }

    /// Discrete weighted `L_p` norm, `(sum_k w_k |f(x_k)|^p)^(1/p)` with
    /// Gauss-Chebyshev weights `w_k = (pi/N) sqrt(1-x_k^2)`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for (k, v) in self.point_values().iter().enumerate() {
            acc += node_angle(n, k).sin() * v.norm().powf(p);
        }
        (acc * PI / n as f64).powf(1.0 / p)
    }

    /// Writes `x,re,im` rows of the full function values.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node,value_re,value_im")?;
        for (x, v) in self.nodes().iter().zip(self.point_values()) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", x, v.re, v.im)?;
        }
        Ok(())
    }
}

/// Coefficients of the degree `N-1` interpolant at the Gauss nodes.
pub fn chebyshev_coefficients(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mean = values.iter().sum::<Complex64>() / n as f64;
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    a[0] = mean;
    // sum_k cos(m theta_k) = 0 for 0 < m < 2N, so the mean drops out
    for (m, am) in a.iter_mut().enumerate().skip(1) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in values.iter().enumerate() {
            acc += (v - mean) * (m as f64 * node_angle(n, k)).cos();
        }
        *am = acc * (2.0 / n as f64);
    }
    a
}

/// Re-expands `sum a_n T_n` as `sum b_m U_m`.
pub fn t_to_u(a: &[Complex64]) -> Vec<Complex64> {
    let mut b = vec![Complex64::new(0.0, 0.0); a.len()];
    for (n, &an) in a.iter().enumerate() {
        match n {
            0 => b[0] += an,
            1 => b[1] += an * 0.5,
            _ => {
                b[n] += an * 0.5;
                b[n - 2] -= an * 0.5;
            }
        }
    }
    b
}

fn check_input(f: &ChebFunction) -> Result<()> {
    if f.n() < MIN_NODES {
        return Err(Error::TooFewNodes(f.n()));
    }
    if let Some(k) = f.values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    Ok(())
}

/// `int_{-1}^{1} T_n(y) dy`.
fn chebyshev_moment(n: usize) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (n * n) as f64)
    }
}

/// Finite Hilbert transform of `f`, returned as smooth-class samples at the
/// same nodes.
pub fn fht_forward(f: &ChebFunction) -> Result<ChebFunction> {
    check_input(f)?;
    let n = f.n();
    let xs = f.nodes();
    let a = f.chebyshev_coefficients();
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    match f.weight {
        WeightClass::Sqrt => {
            let b = t_to_u(&a);
            for (k, gk) in g.iter_mut().enumerate() {
                let th = node_angle(n, k);
                for (m, bm) in b.iter().enumerate() {
                    *gk += bm * ((m + 1) as f64 * th).cos();
                }
            }
        }
        WeightClass::InvSqrt => {
            for (k, gk) in g.iter_mut().enumerate() {
                let th = node_angle(n, k);
                let st = th.sin();
                for (m, am) in a.iter().enumerate().skip(1) {
                    *gk -= am * ((m as f64 * th).sin() / st);
                }
            }
        }
        WeightClass::Smooth => {
            for (k, gk) in g.iter_mut().enumerate() {
                let x = xs[k];
                let mut i_prev = 0.0;
                let mut i_cur = 2.0;
                let mut poly = Complex64::new(0.0, 0.0);
                for (m, am) in a.iter().enumerate().skip(1) {
                    poly += am * i_cur;
                    let i_next = 2.0 * x * i_cur + 2.0 * chebyshev_moment(m) - i_prev;
                    i_prev = i_cur;
                    i_cur = i_next;
                }
                let log = ((1.0 + x) / (1.0 - x)).ln();
                *gk = -poly / PI + f.values[k] * log / PI;
            }
        }
    }
    ChebFunction::new(g, WeightClass::Smooth)
}

/// Tricomi inverse with explicit null-space coefficient `c`:
/// `f = -T g - (1/(pi sqrt(1-x^2))) int (x+y) g(y) / (sqrt(1-x^2)+sqrt(1-y^2)) dy + c/sqrt(1-x^2)`,
/// evaluated on the Chebyshev basis as
/// `f = (c - sum_m g_m T_{m+1}) / sqrt(1-x^2)` for `g = sum_m g_m U_m`.
/// The result has weight class inv_sqrt.
pub fn fht_tricomi_inverse(g: &ChebFunction, c: Complex64) -> Result<ChebFunction> {
    check_input(g)?;
    let n = g.n();
    let smooth = ChebFunction::new(g.point_values(), WeightClass::Smooth)?;
    let u = t_to_u(&smooth.chebyshev_coefficients());
    let mut h = vec![c; n];
    for (k, hk) in h.iter_mut().enumerate() {
        let th = node_angle(n, k);
        for (m, um) in u.iter().enumerate() {
            *hk -= um * ((m + 1) as f64 * th).cos();
        }
    }
    ChebFunction::new(h, WeightClass::InvSqrt)
}

/// Result of [`fht_pseudoinverse`].
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub f: ChebFunction,
    pub null_coefficient: Complex64,
    /// `max_k |T f - g|` at the nodes.
    pub residual: f64,
}

/// Minimum weighted-`L_p` solution of `T f = g` over the Tricomi family
/// `f_0 + c/sqrt(1-x^2)`.
pub fn fht_pseudoinverse(g: &ChebFunction, p: f64) -> Result<PseudoInverse> {
    fht_pseudoinverse_with_tol(g, p, tolerances::PSEUDOINVERSE_RESIDUAL)
}

pub fn fht_pseudoinverse_with_tol(g: &ChebFunction, p: f64, tol: f64) -> Result<PseudoInverse> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidInput(format!("exponent p = {p} outside (1,2)")));
    }
    let base = fht_tricomi_inverse(g, Complex64::new(0.0, 0.0))?;
    let c = minimize_null_coefficient(&base, p);
    let f = ChebFunction::new(base.values.iter().map(|h| h + c).collect(), WeightClass::InvSqrt)?;
    let image = fht_forward(&f)?;
    let target = g.point_values();
    let residual =
        image.values.iter().zip(&target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = target.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if residual > tol * scale {
        return Err(Error::NoConvergence { what: "pseudoinverse residual".into(), residual });
    }
    Ok(PseudoInverse { f, null_coefficient: c, residual })
}

/// Minimises `sum_k w_k |h_k + c|^p` over complex `c` by iteratively
/// reweighted least squares; `w_k` are the `L_p` weights of an inv_sqrt
/// function.
pub fn minimize_null_coefficient(base: &ChebFunction, p: f64) -> Complex64 {
    let n = base.n();
    let w: Vec<f64> =
        (0..n).map(|k| node_angle(n, k).sin().powf(1.0 - p)).collect();
    let h = &base.values;
    if h.iter().all(|v| v.norm() == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let objective = |c: Complex64| -> f64 {
        h.iter().zip(&w).map(|(hk, wk)| wk * (hk + c).norm().powf(p)).sum()
    };
    let scale = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-14 * scale;
    let mut c = -h.iter().zip(&w).map(|(hk, wk)| hk * *wk).sum::<Complex64>()
        / w.iter().sum::<f64>();
    for _ in 0..500 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (hk, wk) in h.iter().zip(&w) {
            let r = (hk + c).norm().max(floor);
            let q = wk * r.powf(p - 2.0);
            num += hk * q;
            den += q;
        }
        let next = -num / den;
        let step = (next - c).norm();
        if objective(next) <= objective(c) {
            c = next;
        }
        if step <= 1e-15 * (1.0 + scale) {
            break;
        }
    }
    c
}

/// `int_{-1}^{1} g(x)/sqrt(1-x^2) dx` by Gauss-Chebyshev quadrature.
pub fn range_defect(g: &ChebFunction) -> Complex64 {
    let n = g.n();
    let pv = g.point_values();
    pv.iter().sum::<Complex64>() * (PI / n as f64)
}

/// Reference evaluator: adaptive principal-value quadrature with singularity
/// subtraction, used to validate the spectral engine. `smooth` is the smooth
/// part of a real function in the given weight class; integration runs in
/// `y = cos(theta)`.
pub fn pv_quadrature(weight: WeightClass, smooth: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let tx = x.acos();
    match weight {
        WeightClass::InvSqrt => {
            let sx = smooth(x);
            let integrand = |t: f64| {
                let y = t.cos();
                if (y - x).abs() < 1e-300 {
                    0.0
                } else {
                    (smooth(y) - sx) / (x - y)
                }
            };
            (adaptive_gk(&integrand, 0.0, tx, 1e-14) + adaptive_gk(&integrand, tx, PI, 1e-14)) / PI
        }
        WeightClass::Smooth | WeightClass::Sqrt => {
            let full = |y: f64| smooth(y) * weight.factor(y);
            let fx = full(x);
            let integrand = |t: f64| {
                let y = t.cos();
                if (y - x).abs() < 1e-300 {
                    0.0
                } else {
                    (full(y) - fx) / (x - y) * t.sin()
                }
            };
            let regular =
                adaptive_gk(&integrand, 0.0, tx, 1e-14) + adaptive_gk(&integrand, tx, PI, 1e-14);
            (regular + fx * ((1.0 + x) / (1.0 - x)).ln()) / PI
        }
    }
}

const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let d = h * GK_X[i];
        let s = f(c - d) + f(c + d);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on `[a,b]`: the interval
/// with the largest error estimate is bisected until the total estimate drops
/// below `tol` or the subdivision budget runs out.
pub fn adaptive_gk(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.3).sum();
        let value: f64 = parts.iter().map(|p| p.2).sum();
        if total <= tol.max(1e-15 * value.abs()) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// One row of the documentation table of exact transform pairs.
#[derive(Debug, Clone)]
pub struct PairRow {
    pub label: String,
    pub max_error: f64,
}

/// Exact pairs `{1, sqrt(1-y^2) U_{n-1}, T_n/sqrt(1-y^2), 1/sqrt(1-y^2)}` at
/// `n` nodes, each compared against its closed form.
pub fn pair_table(n: usize) -> Result<Vec<PairRow>> {
    let mut rows = Vec::new();
    let one = ChebFunction::from_fn(n, WeightClass::Smooth, |_| 1.0)?;
    let g = fht_forward(&one)?;
    rows.push(PairRow {
        label: "1 -> ln((1+x)/(1-x))/pi".into(),
        max_error: max_err_real(&g, |x| ((1.0 + x) / (1.0 - x)).ln() / PI),
    });
    for k in 1..=6 {
        let f = ChebFunction::from_fn(n, WeightClass::Sqrt, |x| cheb_u(k - 1, x))?;
        let g = fht_forward(&f)?;
        rows.push(PairRow {
            label: format!("sqrt(1-y^2) U_{} -> T_{}", k - 1, k),
            max_error: max_err_real(&g, |x| cheb_t(k, x)),
        });
        let f = ChebFunction::from_fn(n, WeightClass::InvSqrt, |x| cheb_t(k, x))?;
        let g = fht_forward(&f)?;
        rows.push(PairRow {
            label: format!("T_{}/sqrt(1-y^2) -> -U_{}", k, k - 1),
            max_error: max_err_real(&g, |x| -cheb_u(k - 1, x)),
        });
    }
    let f = ChebFunction::from_fn(n, WeightClass::InvSqrt, |_| 1.0)?;
    rows.push(PairRow {
        label: "1/sqrt(1-y^2) -> 0".into(),
        max_error: fht_forward(&f)?.max_abs(),
    });
    Ok(rows)
}

fn max_err_real(g: &ChebFunction, exact: impl Fn(f64) -> f64) -> f64 {
    g.nodes()
        .iter()
        .zip(g.point_values())
        .map(|(&x, v)| (v - exact(x)).norm())
        .fold(0.0, f64::max)
}

/// Chebyshev polynomial of the first kind.
pub fn cheb_t(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Chebyshev polynomial of the second kind.
pub fn cheb_u(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_small_and_nonfinite() {
        assert_eq!(ChebFunction::from_real(&[1.0; 7], WeightClass::Smooth), Err(Error::TooFewNodes(7)));
        let mut v = vec![1.0; 9];
        v[3] = f64::NAN;
        assert_eq!(ChebFunction::from_real(&v, WeightClass::Smooth), Err(Error::NonFinite(3)));
    }

    #[test]
    fn null_space_maps_to_zero() {
        let f = ChebFunction::from_fn(64, WeightClass::InvSqrt, |_| 1.0).unwrap();
        assert!(fht_forward(&f).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn constant_maps_to_log() {
        let f = ChebFunction::from_fn(64, WeightClass::Smooth, |_| 1.0).unwrap();
        let g = fht_forward(&f).unwrap();
        for (x, v) in g.nodes().iter().zip(g.values()) {
            assert!((v.re - ((1.0 + x) / (1.0 - x)).ln() / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_class_matches_reference() {
        for n in 0..8 {
            let f = ChebFunction::from_fn(32, WeightClass::Smooth, |x| cheb_t(n, x)).unwrap();
            let g = fht_forward(&f).unwrap();
            for (x, v) in g.nodes().iter().zip(g.values()) {
                let r = pv_quadrature(WeightClass::Smooth, &|y| cheb_t(n, y), *x);
                assert!((v.re - r).abs() < 1e-10, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn tricomi_null_term_only() {
        let g = ChebFunction::zeros(16, WeightClass::Smooth).unwrap();
        let f = fht_tricomi_inverse(&g, c(2.0)).unwrap();
        assert_eq!(f.weight_class(), WeightClass::InvSqrt);
        for v in f.values() {
            assert!((v - c(2.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tricomi_of_x() {
        // inverse of g = x at C = 0 is (1/2 - x^2)/sqrt(1-x^2)
        let g = ChebFunction::from_fn(32, WeightClass::Smooth, |x| x).unwrap();
        let f = fht_tricomi_inverse(&g, c(0.0)).unwrap();
        for (x, v) in f.nodes().iter().zip(f.values()) {
            assert!((v.re - (0.5 - x * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn round_trip_with_null_coefficient() {
        let f = ChebFunction::from_fn(64, WeightClass::Sqrt, |x| 1.0 + x - 0.3 * x * x * x).unwrap();
        let g = fht_forward(&f).unwrap();
        let back = fht_tricomi_inverse(&g, f.null_coefficient()).unwrap();
        let diff = f
            .point_values()
            .iter()
            .zip(back.point_values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn range_defect_examples() {
        let one = ChebFunction::from_fn(16, WeightClass::Smooth, |_| 1.0).unwrap();
        assert!((range_defect(&one) - c(PI)).norm() < 1e-14);
        for n in 1..8 {
            let t = ChebFunction::from_fn(16, WeightClass::Smooth, |x| cheb_t(n, x)).unwrap();
            assert!(range_defect(&t).norm() < 1e-14);
        }
    }

    #[test]
    fn pseudoinverse_of_zero_is_zero() {
        let g = ChebFunction::zeros(16, WeightClass::Smooth).unwrap();
        let r = fht_pseudoinverse(&g, 1.5).unwrap();
        assert_eq!(r.f.max_abs(), 0.0);
        assert_eq!(r.null_coefficient, c(0.0));
    }

    #[test]
    fn pseudoinverse_rejects_exponent() {
        let g = ChebFunction::zeros(16, WeightClass::Smooth).unwrap();
        assert!(fht_pseudoinverse(&g, 2.0).is_err());
    }

    #[test]
    fn pv_quadrature_matches_closed_forms() {
        for &x in &[-0.9, -0.3, 0.1, 0.77] {
            let v = pv_quadrature(WeightClass::Smooth, &|_| 1.0, x);
            assert!((v - ((1.0 + x) / (1.0 - x)).ln() / PI).abs() < 1e-11);
            let v = pv_quadrature(WeightClass::Sqrt, &|_| 1.0, x);
            assert!((v - x).abs() < 1e-11);
            let v = pv_quadrature(WeightClass::InvSqrt, &|y| y, x);
            assert!((v + 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn chebyshev_polynomials() {
        let x = 0.3f64;
        assert!((cheb_t(3, x) - (4.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
        assert!((cheb_u(2, x) - (4.0 * x * x - 1.0)).abs() < 1e-15);
    }
}
