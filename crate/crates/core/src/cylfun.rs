//! Integer-order cylinder functions of a real argument.
//!
//! `J_n` comes from Miller's downward recurrence normalised with
//! `J_0 + 2 Σ J_2k = 1`. `Y_0` and `Y_1` use the ascending series with the
//! logarithmic term up to `t = 12` and Hankel's asymptotic expansion beyond;
//! higher orders follow by upward recurrence, which is stable for `Y`.
//! Negative orders are reduced with `C_{-n} = (-1)^n C_n` before anything else.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported |order| for the public entry points.
pub const MAX_ORDER: i32 = 200;

/// |Y_n| is clamped to this magnitude instead of overflowing.
pub const Y_SATURATION: f64 = 1e280;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 12.0;
const RESCALE: f64 = 1e250;

/// One evaluation of `J_n`, `Y_n` and `H_n^(1)` at a single order and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylEval {
    pub order: i32,
    pub argument: f64,
    pub jn: f64,
    pub yn: f64,
    pub h1: Complex64,
    /// `yn` hit [`Y_SATURATION`] and is only a magnitude floor.
    pub saturated: bool,
}

/// Factor relating `C_n` to `C_{|n|}`: `(-1)^n` for negative odd orders, else 1.
fn reflect(n: i32) -> f64 {
    if n < 0 && n % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

fn check_order(n: i32, limit: i32) -> Result<usize> {
    if n.abs() > limit {
        return Err(Error::Domain(format!(
            "order {n} outside supported range |n| <= {limit}"
        )));
    }
    Ok(n.unsigned_abs() as usize)
}

fn check_positive(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("argument must be positive, got {t}")));
    }
    Ok(())
}

/// `J_0 .. J_nmax` at `t >= 0` by Miller's algorithm.
fn j_orders(nmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let mut start = nmax + (10.0 + 1.5 * t).ceil() as usize + 10;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut sum = 0.0;
    for m in (1..=start).rev() {
        if m <= nmax {
            out[m] = cur;
        }
        if m % 2 == 0 {
            sum += 2.0 * cur;
        }
        let prev = (2.0 * m as f64 / t) * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            sum /= RESCALE;
            for v in out.iter_mut().skip(m.min(nmax + 1)) {
                *v /= RESCALE;
            }
        }
    }
    out[0] = cur;
    sum += cur;
    for v in &mut out {
        *v /= sum;
    }
    out
}

fn y0_y1_series(t: f64, j0: f64, j1: f64) -> (f64, f64) {
    let q = 0.25 * t * t;
    let log_term = (0.5 * t).ln() + EULER_GAMMA;

    // Y0 = (2/pi)[(ln(t/2)+gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2]
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut s0 = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = -term * harmonic;
        s0 += add;
        if add.abs() < 1e-17 * s0.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    let y0 = FRAC_2_PI * (log_term * j0 + s0);

    // Y1 = (2/pi)[(ln(t/2)+gamma) J1 - 1/t]
    //      - (1/pi) sum_{k>=0} (-1)^k (H_k + H_{k+1}) (t/2)^{2k+1} / (k!(k+1)!)
    let half = 0.5 * t;
    let mut term = half;
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    let mut s1 = term * (hk + hk1);
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
        let add = term * (hk + hk1);
        s1 += add;
        if add.abs() < 1e-17 * s1.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    let y1 = FRAC_2_PI * (log_term * j1 - 1.0 / t) - s1 / PI;
    (y0, y1)
}

/// Hankel's large-argument expansion, returns `(P, Q)` for order `nu`.
fn hankel_pq(nu: f64, t: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * t);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        // a_k / t^k with sign (-1)^{floor(k/2)}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn y0_y1(t: f64, j0: f64, j1: f64) -> (f64, f64) {
    if t <= SERIES_LIMIT {
        return y0_y1_series(t, j0, j1);
    }
    let amp = (FRAC_2_PI / t).sqrt();
    let (p0, q0) = hankel_pq(0.0, t);
    let chi0 = t - 0.25 * PI;
    let (p1, q1) = hankel_pq(1.0, t);
    let chi1 = t - 0.75 * PI;
    (
        amp * (p0 * chi0.sin() + q0 * chi0.cos()),
        amp * (p1 * chi1.sin() + q1 * chi1.cos()),
    )
}

/// `J_n`, `Y_n` for all orders `0..=nmax` at one positive argument.
///
/// This is the workhorse for field evaluation: one Miller sweep and one
/// upward `Y` sweep serve every mode of a truncated expansion.
#[derive(Debug, Clone)]
pub struct CylinderTable {
    argument: f64,
    j: Vec<f64>,
    y: Vec<f64>,
    saturated_from: Option<usize>,
}

impl CylinderTable {
    pub fn new(nmax: usize, t: f64) -> Result<Self> {
        check_positive(t)?;
        if nmax > MAX_ORDER as usize + 1 {
            return Err(Error::Domain(format!("table order {nmax} too large")));
        }
        let j = j_orders(nmax.max(1), t);
        let (y0, y1) = y0_y1(t, j[0], j[1]);
        let mut y = Vec::with_capacity(nmax.max(1) + 1);
        y.push(y0);
        y.push(y1);
        let mut saturated_from = None;
        for m in 1..nmax.max(1) {
            let next = if saturated_from.is_some() {
                -Y_SATURATION
            } else {
                let v = (2.0 * m as f64 / t) * y[m] - y[m - 1];
                if !v.is_finite() || v.abs() > Y_SATURATION {
                    saturated_from = Some(m + 1);
                    -Y_SATURATION
                } else {
                    v
                }
            };
            y.push(next);
        }
        let mut j = j;
        j.truncate(nmax + 1);
        y.truncate(nmax + 1);
        Ok(Self {
            argument: t,
            j,
            y,
            saturated_from,
        })
    }

    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn max_order(&self) -> usize {
        self.j.len() - 1
    }

    /// Any stored `Y_n` clamped at [`Y_SATURATION`]?
    pub fn saturated(&self) -> bool {
        self.saturated_from.is_some()
    }

    pub fn is_saturated(&self, n: i32) -> bool {
        matches!(self.saturated_from, Some(s) if n.unsigned_abs() as usize >= s)
    }

    pub fn j(&self, n: i32) -> f64 {
        reflect(n) * self.j[n.unsigned_abs() as usize]
    }

    pub fn y(&self, n: i32) -> f64 {
        reflect(n) * self.y[n.unsigned_abs() as usize]
    }

    pub fn h(&self, n: i32) -> Complex64 {
        Complex64::new(self.j(n), self.y(n))
    }

    /// `J_n'(t) = J_{n-1}(t) - n J_n(t)/t`; needs order `|n|+1` in the table for n < 0.
    pub fn j_deriv(&self, n: i32) -> f64 {
        self.j(n - 1) - n as f64 * self.j(n) / self.argument
    }

    /// `H_n'(t) = -H_{n+1}(t) + n H_n(t)/t`; needs order `|n|+1` in the table.
    pub fn h_deriv(&self, n: i32) -> Complex64 {
        -self.h(n + 1) + self.h(n) * (n as f64 / self.argument)
    }
}

/// Bessel function of the first kind.
pub fn bessel_j(n: i32, t: f64) -> Result<f64> {
    let m = check_order(n, MAX_ORDER + 1)?;
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("argument must be >= 0, got {t}")));
    }
    Ok(reflect(n) * j_orders(m.max(1), t)[m])
}

/// Bessel function of the second kind. Saturates at `-1e280` rather than overflowing;
/// use [`cyl_eval`] to see the saturation flag.
pub fn bessel_y(n: i32, t: f64) -> Result<f64> {
    Ok(cyl_eval(n, t)?.yn)
}

pub fn cyl_eval(n: i32, t: f64) -> Result<CylEval> {
    let m = check_order(n, MAX_ORDER + 1)?;
    let table = CylinderTable::new(m, t)?;
    Ok(CylEval {
        order: n,
        argument: t,
        jn: table.j(n),
        yn: table.y(n),
        h1: table.h(n),
        saturated: table.is_saturated(n),
    })
}

/// Hankel function of the first kind, `J_n + i Y_n`.
pub fn hankel1(n: i32, t: f64) -> Result<Complex64> {
    Ok(cyl_eval(n, t)?.h1)
}

/// `H_n'(t) = -H_{n+1}(t) + n H_n(t) / t`.
pub fn hankel1_deriv(n: i32, t: f64) -> Result<Complex64> {
    check_order(n, MAX_ORDER)?;
    check_positive(t)?;
    let table = CylinderTable::new(n.unsigned_abs() as usize + 1, t)?;
    Ok(table.h_deriv(n))
}

/// `J_n'(t) = J_{n-1}(t) - n J_n(t) / t`, with the series limit at `t = 0`.
pub fn bessel_j_deriv(n: i32, t: f64) -> Result<f64> {
    check_order(n, MAX_ORDER)?;
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("argument must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(match n {
            1 => 0.5,
            -1 => -0.5,
            _ => 0.0,
        });
    }
    let m = n.unsigned_abs() as usize + 1;
    let j = j_orders(m, t);
    let at = |k: i32| reflect(k) * j[k.unsigned_abs() as usize];
    Ok(at(n - 1) - n as f64 * at(n) / t)
}

/// `ln Γ(n) = Σ_{m<n} ln m` for positive integers.
pub fn ln_gamma_int(n: u32) -> f64 {
    (1..n).map(|m| (m as f64).ln()).sum()
}

/// Outcome of a two-sided bound check over a range of orders.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub argument: f64,
    /// First order checked (inclusive).
    pub first_order: u32,
    pub last_order: u32,
    pub lower: f64,
    pub upper: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Order at which the smallest / largest ratio occurred.
    pub argmin: u32,
    pub argmax: u32,
}

impl BoundReport {
    /// All ratios lie in `[lower, upper]` (compared on logarithms).
    pub fn holds(&self) -> bool {
        self.min_ratio.ln() >= self.lower.ln() - 1e-12 && self.max_ratio.ln() <= self.upper.ln() + 1e-12
    }

    pub fn is_empty(&self) -> bool {
        self.first_order > self.last_order
    }
}

fn guarded_ln(v: f64, what: &str, n: u32, t: f64) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::Overflow(format!(
            "{what} not representable at n = {n}, t = {t}"
        )));
    }
    Ok(v.abs().ln())
}

/// `ln[π t^n |H_n(t)| / (3 · 2^{n-1} Γ(n))]` for `n >= 1`.
pub fn hankel_bound_log_ratio(n: u32, t: f64) -> Result<f64> {
    check_positive(t)?;
    if n == 0 || n > MAX_ORDER as u32 {
        return Err(Error::Domain(format!("order {n} outside 1..={MAX_ORDER}")));
    }
    let table = CylinderTable::new(n as usize, t)?;
    if table.is_saturated(n as i32) {
        return Err(Error::Overflow(format!("|Y_{n}({t})| saturated")));
    }
    let (jn, yn) = (table.j(n as i32), table.y(n as i32));
    let ln_y = guarded_ln(yn, "Y_n", n, t)?;
    let ln_h = ln_y + 0.5 * (1.0 + (jn / yn).powi(2)).ln();
    let nf = n as f64;
    Ok(PI.ln() + nf * t.ln() + ln_h - 3f64.ln() - (nf - 1.0) * 2f64.ln() - ln_gamma_int(n))
}

/// `ln[2^n n! |J_n(t)| / t^n]`.
pub fn bessel_bound_log_ratio(n: u32, t: f64) -> Result<f64> {
    check_positive(t)?;
    if n > MAX_ORDER as u32 {
        return Err(Error::Domain(format!("order {n} outside 0..={MAX_ORDER}")));
    }
    let jn = bessel_j(n as i32, t)?;
    let ln_j = guarded_ln(jn, "J_n", n, t)?;
    let nf = n as f64;
    Ok(nf * 2f64.ln() + ln_gamma_int(n + 1) + ln_j - nf * t.ln())
}

fn scan_bounds(
    t: f64,
    first: u32,
    last: u32,
    lower: f64,
    upper: f64,
    log_ratio: impl Fn(u32, f64) -> Result<f64>,
) -> Result<BoundReport> {
    let mut report = BoundReport {
        argument: t,
        first_order: first,
        last_order: last,
        lower,
        upper,
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        argmin: first,
        argmax: first,
    };
    let mut min_log = f64::INFINITY;
    let mut max_log = f64::NEG_INFINITY;
    for n in first..=last {
        let l = log_ratio(n, t)?;
        if l < min_log {
            min_log = l;
            report.argmin = n;
        }
        if l > max_log {
            max_log = l;
            report.argmax = n;
        }
    }
    if first <= last {
        report.min_ratio = min_log.exp();
        report.max_ratio = max_log.exp();
    }
    Ok(report)
}

/// Smallest order with `n > (e t + 1)/2`, never below 2.
pub fn hankel_bound_first_order(t: f64) -> u32 {
    let threshold = (std::f64::consts::E * t + 1.0) / 2.0;
    (threshold.floor() as u32 + 1).max(2)
}

/// Smallest order with `n > ⌊max(0.3 t² - 1, 1)⌋`.
pub fn bessel_bound_first_order(t: f64) -> u32 {
    let threshold = (0.3 * t * t - 1.0).max(1.0).floor();
    threshold as u32 + 1
}

/// Checks `1/2 <= π t^n |H_n(t)| / (3·2^{n-1} Γ(n)) <= e^t` for every order from
/// [`hankel_bound_first_order`] up to `n_max`.
pub fn check_hankel_bounds(t: f64, n_max: u32) -> Result<BoundReport> {
    check_positive(t)?;
    if n_max > MAX_ORDER as u32 {
        return Err(Error::Domain(format!("n_max {n_max} above {MAX_ORDER}")));
    }
    let first = hankel_bound_first_order(t);
    scan_bounds(t, first, n_max, 0.5, t.exp(), hankel_bound_log_ratio)
}

/// Checks `1/6 <= 2^n n! |J_n(t)| / t^n <= 1` for every order from
/// [`bessel_bound_first_order`] up to `n_max`.
pub fn check_bessel_bounds(t: f64, n_max: u32) -> Result<BoundReport> {
    check_positive(t)?;
    if n_max > MAX_ORDER as u32 {
        return Err(Error::Domain(format!("n_max {n_max} above {MAX_ORDER}")));
    }
    let first = bessel_bound_first_order(t);
    scan_bounds(t, first, n_max, 1.0 / 6.0, 1.0, bessel_bound_log_ratio)
}
