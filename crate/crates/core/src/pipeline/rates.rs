//! Truncation and noise rates of the continuation for concentric circles,
//! where every radius ratio in the stability estimates is known exactly.

use num_complex::Complex64;

use crate::continuation::{compute_coefficients, ModeBasis};
use crate::forward::{analytic_circle, FieldKind, RingMeasurement, SourceSet};
use crate::geometry::{Circle, Point, ShapeKind};
use crate::noise::{add_noise, NoiseSpec};
use crate::{BoundaryCondition, Error, Result, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub side: Side,
    pub bc: BoundaryCondition,
    pub shape: ShapeKind,
    pub wavenumber: f64,
    /// Ring carrying sources and receivers.
    pub measurement_radius: f64,
    /// Radius of the auxiliary circle in the estimates (inside the obstacle,
    /// or outside the cavity).
    pub analysis_radius: f64,
    pub receiver_count: usize,
    pub boundary_points: usize,
    pub max_truncation: usize,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl StudyConfig {
    /// Obstacle `a = 1`, ring 2.2, auxiliary radius 0.5, k = 3.
    pub fn exterior() -> Self {
        Self {
            side: Side::Exterior,
            bc: BoundaryCondition::Soft,
            shape: ShapeKind::Circle {
                center: Point::ORIGIN,
                radius: 1.0,
            },
            wavenumber: 3.0,
            measurement_radius: 2.2,
            analysis_radius: 0.5,
            receiver_count: 128,
            boundary_points: 256,
            max_truncation: 40,
            deltas: vec![1e-2, 1e-3, 1e-4],
            seeds: vec![1, 2, 3],
        }
    }

    /// Cavity `a = 1`, ring 0.5, auxiliary radius 1.2, k = 3.
    pub fn interior() -> Self {
        Self {
            side: Side::Interior,
            measurement_radius: 0.5,
            analysis_radius: 1.2,
            ..Self::exterior()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePoint {
    pub delta: f64,
    pub truncation: usize,
    pub errors: Vec<f64>,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub side: Side,
    pub boundary_radius: f64,
    pub measurement_radius: f64,
    pub analysis_radius: f64,
    /// Distance between the auxiliary circle and the boundary.
    pub gap: f64,
    /// Radius ratios `(τ1, τ2, τ3)` or `(σ1, σ2, σ3)`.
    pub ratios: [f64; 3],
    /// `ln r2 / ln r1`
    pub predicted_exponent: f64,
    /// Order where the mode bounds start to hold.
    pub start_order: f64,
    /// Noise levels below `r1^-start_order` satisfy the estimate's hypothesis.
    pub delta_limit: f64,
    /// Relative boundary-trace error per truncation order, clean data.
    pub clean: Vec<(usize, f64)>,
    pub fit_range: (usize, usize),
    pub fitted_ratio: f64,
    pub ratio_residual: f64,
    pub noisy: Vec<NoisePoint>,
    pub fitted_exponent: f64,
    pub exponent_residual: f64,
}

impl RateReport {
    pub fn ratio_names(&self) -> [&'static str; 3] {
        match self.side {
            Side::Exterior => ["tau1", "tau2", "tau3"],
            Side::Interior => ["sigma1", "sigma2", "sigma3"],
        }
    }

    pub fn exponent_name(&self) -> &'static str {
        match self.side {
            Side::Exterior => "alpha",
            Side::Interior => "beta",
        }
    }

    pub fn to_text(&self) -> String {
        let names = self.ratio_names();
        let mut s = format!(
            "side = {}\nboundary_radius = {}\nmeasurement_radius = {}\nanalysis_radius = {}\ngap = {}\n",
            self.side.as_str(),
            self.boundary_radius,
            self.measurement_radius,
            self.analysis_radius,
            self.gap
        );
        for (n, v) in names.iter().zip(self.ratios) {
            s.push_str(&format!("{n} = {v:.6}\n"));
        }
        s.push_str(&format!("{} = {:.6}\n", self.exponent_name(), self.predicted_exponent));
        s.push_str(&format!(
            "start_order = {:.4}\ndelta_limit = {:.3e}\n",
            self.start_order, self.delta_limit
        ));
        s.push_str(&format!(
            "clean_fit_range = {}..{}\nfitted_ratio = {:.6}\nratio_fit_residual = {:.3e}\n",
            self.fit_range.0, self.fit_range.1, self.fitted_ratio, self.ratio_residual
        ));
        s.push_str(&format!(
            "fitted_exponent = {:.6}\nexponent_fit_residual = {:.3e}\n",
            self.fitted_exponent, self.exponent_residual
        ));
        for (n, e) in &self.clean {
            s.push_str(&format!("# clean N={n} error={e:.6e}\n"));
        }
        for p in &self.noisy {
            s.push_str(&format!(
                "# noisy delta={:e} N={} mean_error={:.6e}\n",
                p.delta, p.truncation, p.mean_error
            ));
        }
        s
    }
}

/// Least-squares line `y = a x + b`; returns `(a, b, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rms = (x.iter().zip(y).map(|(u, v)| (v - a * u - b).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

fn relative_l2(approx: &[Complex64], exact: &[Complex64]) -> f64 {
    let num: f64 = approx.iter().zip(exact).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = exact.iter().map(|b| b.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn convergence_study(cfg: &StudyConfig) -> Result<RateReport> {
    let a = match &cfg.shape {
        ShapeKind::Circle { center, radius } if center.x == 0.0 && center.y == 0.0 => *radius,
        other => {
            return Err(Error::NonCircular(format!(
                "rate study needs a circle centred at the origin, got {}",
                other.name()
            )))
        }
    };
    let (rho_meas, r_aux, k) = (cfg.measurement_radius, cfg.analysis_radius, cfg.wavenumber);
    let (gap, ratios) = match cfg.side {
        Side::Exterior => {
            if !(r_aux < a && a < rho_meas) {
                return Err(Error::NonCircular("exterior study needs R < a < rho".into()));
            }
            let gamma = a - r_aux;
            let (tau1, tau2, tau3) = (rho_meas / r_aux, (r_aux + gamma) / r_aux, rho_meas / (r_aux + gamma));
            (gamma, [tau1, tau2, tau3])
        }
        Side::Interior => {
            if !(rho_meas < a && a < r_aux) {
                return Err(Error::NonCircular("interior study needs R < a < rho".into()));
            }
            let mu = r_aux - a;
            let (s1, s2, s3) = (r_aux / rho_meas, r_aux / (r_aux - mu), (r_aux - mu) / rho_meas);
            (mu, [s1, s2, s3])
        }
    };
    let predicted_exponent = ratios[1].ln() / ratios[0].ln();

    let sources = SourceSet::new(Circle::centered(rho_meas), 1, cfg.side)?;
    let z = sources.locations()[0];
    let receivers = Circle::centered(rho_meas).points(cfg.receiver_count);
    let boundary = Circle::centered(a).points(cfg.boundary_points);
    let clean_ring = RingMeasurement {
        radius: rho_meas,
        wavenumber: k,
        sources,
        field: FieldKind::Scattered,
        delta: 0.0,
        samples: vec![analytic_circle(a, cfg.bc, cfg.side, k, z, &receivers)?],
    };
    let exact = analytic_circle(a, cfg.bc, cfg.side, k, z, &boundary)?;
    let trace_error = |ring: &RingMeasurement, n: usize| -> Result<f64> {
        let coeffs = &compute_coefficients(ring, n)?[0];
        let approx = boundary
            .iter()
            .map(|&x| Ok(ModeBasis::new(coeffs, x, false)?.field(coeffs)))
            .collect::<Result<Vec<_>>>()?;
        Ok(relative_l2(&approx, &exact))
    };

    let max_n = cfg.max_truncation.min((cfg.receiver_count - 1) / 2);
    let clean = (1..=max_n)
        .map(|n| Ok((n, trace_error(&clean_ring, n)?)))
        .collect::<Result<Vec<_>>>()?;
    // decaying regime: from the order where the mode bounds kick in to the error minimum
    let start_order = match cfg.side {
        Side::Exterior => (std::f64::consts::E * k * rho_meas + 1.0) / 2.0,
        Side::Interior => (0.3 * (k * r_aux).powi(2) - 1.0).max(1.0).floor(),
    };
    let start = (start_order.ceil() as usize).clamp(1, max_n);
    let end = clean
        .iter()
        .filter(|(n, _)| *n >= start)
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(n, _)| *n)
        .unwrap_or(max_n);
    let window: Vec<&(usize, f64)> = clean.iter().filter(|(n, _)| *n >= start && *n <= end).collect();
    if window.len() < 3 {
        return Err(Error::NoConvergence(window.len()));
    }
    let xs: Vec<f64> = window.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = window.iter().map(|(_, e)| e.ln()).collect();
    let (slope, _, ratio_residual) = linear_fit(&xs, &ys);

    let mut noisy = Vec::new();
    for &delta in &cfg.deltas {
        let truncation = ((1.0 / delta).ln() / ratios[0].ln()).floor().max(1.0) as usize;
        let errors = cfg
            .seeds
            .iter()
            .map(|&seed| {
                let ring = add_noise(&clean_ring, &NoiseSpec::new(delta, seed)?)?;
                trace_error(&ring, truncation)
            })
            .collect::<Result<Vec<_>>>()?;
        let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
        noisy.push(NoisePoint {
            delta,
            truncation,
            errors,
            mean_error,
        });
    }
    let xs: Vec<f64> = noisy.iter().map(|p| p.delta.ln()).collect();
    let ys: Vec<f64> = noisy.iter().map(|p| p.mean_error.ln()).collect();
    let (fitted_exponent, _, exponent_residual) = linear_fit(&xs, &ys);

    Ok(RateReport {
        side: cfg.side,
        boundary_radius: a,
        measurement_radius: rho_meas,
        analysis_radius: r_aux,
        gap,
        ratios,
        predicted_exponent,
        start_order,
        delta_limit: ratios[0].powf(-start_order),
        clean,
        fit_range: (start, end),
        fitted_ratio: (-slope).exp(),
        ratio_residual,
        noisy,
        fitted_exponent,
        exponent_residual,
    })
}
