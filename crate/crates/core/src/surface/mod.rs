//! The glued two-chart model of (C, X): transition maps across the seam,
//! the harmonic function Phi, the Green-based function G, and discrete
//! harmonicity probes.
//!
//! Chart 1 carries z in the fundamental annulus lambda < |z| < 1 and xi
//! in U0; chart 2 carries lambda_1 < |z| < lambda_2 and xi in U1. The
//! seam identifications are i^-(z, xi) = (z, xi) on lambda_1 < |z| < 1
//! and i^+(z, xi) = (lambda z, f(xi)) on 1 < |z| < lambda_2; the
//! exponent a is chosen so the pulled-back function matches across i^+:
//! a = -log|tau|/log lambda for Phi, a = -log d/log lambda for G.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dynamics::{green, GreenEvaluation};
use crate::error::{Error, Result};
use crate::germ::{invert, reduce_with_escalation, PolynomialGerm};
use crate::num::{cabs_f64, to_c64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentMode {
    /// a = -log|tau| / log lambda; glues log|h^{-1}(xi)| + a log|z|.
    Phi,
    /// a = -log d / log lambda; glues g(xi) |z|^a.
    Green,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub chart: Chart,
    pub z: Complex64,
    pub xi: Complex64,
}

impl SurfacePoint {
    pub fn new(chart: Chart, z: Complex64, xi: Complex64) -> Self {
        SurfacePoint { chart, z, xi }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    f: PolynomialGerm,
    coeffs64: Vec<Complex64>,
    pub lambda: f64,
    pub eps0: f64,
    pub mode: ExponentMode,
    /// Exponent a of the gluing weight.
    pub a: f64,
    /// U0 radius; certified injective for invertible germs.
    pub rho: f64,
    /// Concentric inner approximations of U1 and V1.
    pub u1_radius: f64,
    pub v1_radius: f64,
    /// Inverse linearizer coefficients (phi mode, nonlinear f).
    h_inv64: Option<Vec<Complex64>>,
    pub linearization_order: usize,
    /// Radius where the truncated inverse linearizer is certified.
    pub cert_radius: f64,
    green_budget: u32,
}

impl SurfaceModel {
    pub fn lambda1(&self) -> f64 {
        1.0 - self.eps0
    }

    pub fn lambda2(&self) -> f64 {
        1.0 + self.eps0
    }

    pub fn germ(&self) -> &PolynomialGerm {
        &self.f
    }

    /// Build the model. `order` is the linearization order used by the
    /// Phi evaluator on nonlinear germs.
    pub fn new(f: PolynomialGerm, cfg: &RunConfig, mode: ExponentMode, order: usize) -> Result<Self> {
        cfg.validate()?;
        let lambda = cfg.lambda;
        let eps0 = cfg.eps0;
        if lambda >= 1.0 - eps0 {
            return Err(Error::Precondition(
                "need lambda < lambda_1 = 1 - eps0 so the annuli overlap".into(),
            ));
        }
        let tau_abs = cabs_f64(f.tau());
        let d = f.degree();
        let a = match mode {
            ExponentMode::Phi => -tau_abs.ln() / lambda.ln(),
            ExponentMode::Green => {
                if d < 2 {
                    return Err(Error::DegreeTooSmall { needed: 2, got: d });
                }
                -(d as f64).ln() / lambda.ln()
            }
        };
        if mode == ExponentMode::Phi && tau_abs == 0.0 {
            return Err(Error::Precondition(
                "Phi mode needs an invertible germ (tau != 0)".into(),
            ));
        }
        // Exponent identity: lambda^a * |tau| = 1 (phi), lambda^a * d = 1
        // (green), to ulp scale by construction.
        let factor = match mode {
            ExponentMode::Phi => tau_abs,
            ExponentMode::Green => d as f64,
        };
        debug_assert!((lambda.powf(a) * factor - 1.0).abs() < 1e-12);

        let coeffs64 = f.coeffs_f64();
        let rho = match cfg.rho {
            Some(r) => {
                if mode == ExponentMode::Phi && derivative_spread(&coeffs64, r) >= tau_abs {
                    return Err(Error::Precondition(format!(
                        "rho = {r} not certified: sum k|c_k| rho^(k-1) >= |tau|"
                    )));
                }
                r
            }
            None => match mode {
                // Largest dyadic rho with the derivative spread under
                // |tau|/2: |f(x)-f(y)| >= (|tau| - spread)|x - y| > 0
                // makes f injective on U0.
                ExponentMode::Phi => {
                    bisect_max(1.0, |r| derivative_spread(&coeffs64, r) <= tau_abs / 2.0)
                }
                // G is nontrivial only where xi escapes, so the Green
                // chart reaches past the escape radius; the gluing
                // identity g(f(xi)) = d g(xi) needs no injectivity.
                ExponentMode::Green => 1.5 * crate::dynamics::escape_radius(&f)?,
            },
        };

        // Covered-disk lower bound via minimum modulus on |xi| = rho.
        let v0_lower = covered_radius(&coeffs64, rho);
        let v1_radius = v0_lower.min(rho) * 0.999;
        if v1_radius <= 0.0 {
            return Err(Error::Precondition(
                "degenerate geometry: image of U0 covers no disk".into(),
            ));
        }
        let u1_radius = bisect_max(rho, |r| sup_norm(&coeffs64, r) <= v1_radius);

        let (h_inv64, cert_radius) = if mode == ExponentMode::Phi && d >= 2 {
            let rep = reduce_with_escalation(
                &f,
                order,
                cfg.tolerances.elimination,
                &cfg.tolerances,
                cfg.precision_bits.max(256) * 16,
            )?;
            if rep.obstruction.is_some() {
                return Err(Error::Precondition(
                    "Phi linearization does not exist past a resonant obstruction".into(),
                ));
            }
            let h_inv = invert(&rep.conjugator, order)?;
            let h64: Vec<Complex64> = h_inv.coeffs().iter().map(to_c64).collect();
            // Certified where the nonlinear part stays a perturbation:
            // sum_{n>=2} n |b_n| r^{n-1} <= 1/2.
            let cert = bisect_max(rho, |r| {
                h64.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, b)| (i + 1) as f64 * b.norm() * r.powi(i as i32))
                    .sum::<f64>()
                    <= 0.5
            });
            (Some(h64), cert)
        } else {
            (None, rho)
        };

        Ok(SurfaceModel {
            f,
            coeffs64,
            lambda,
            eps0,
            mode,
            a,
            rho,
            u1_radius,
            v1_radius,
            h_inv64,
            linearization_order: order,
            cert_radius,
            green_budget: cfg.green_iteration_max,
        })
    }

    fn check_chart(&self, pt: &SurfacePoint) -> Result<()> {
        let zn = pt.z.norm();
        let xin = pt.xi.norm();
        let ok = match pt.chart {
            Chart::One => zn > self.lambda && zn < 1.0 && xin < self.rho,
            Chart::Two => zn > self.lambda1() && zn < self.lambda2() && xin < self.u1_radius,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "({:?}, |z| = {zn:.6}, |xi| = {xin:.6e}) outside chart domain",
                pt.chart
            )))
        }
    }

    /// Deck-canonical chart-1 representative: |z| reduced to [lambda, 1).
    pub fn canonicalize(&self, mut z: Complex64) -> Complex64 {
        while z.norm() >= 1.0 {
            z *= self.lambda;
        }
        while z.norm() < self.lambda {
            z /= self.lambda;
        }
        z
    }

    /// i^-: chart 2 -> chart 1 on lambda_1 < |z| < 1, identical
    /// coordinates.
    pub fn transition_minus(&self, pt: &SurfacePoint) -> Result<SurfacePoint> {
        if pt.chart != Chart::Two {
            return Err(Error::OutOfDomain("transition_minus expects chart 2".into()));
        }
        self.check_chart(pt)?;
        let zn = pt.z.norm();
        if !(zn > self.lambda1() && zn < 1.0) {
            return Err(Error::OutOfDomain(format!(
                "|z| = {zn:.6} outside the i^- overlap ({}, 1)",
                self.lambda1()
            )));
        }
        Ok(SurfacePoint::new(Chart::One, pt.z, pt.xi))
    }

    /// Inverse of i^-: chart 1 -> chart 2 on the same band.
    pub fn transition_minus_inverse(&self, pt: &SurfacePoint) -> Result<SurfacePoint> {
        if pt.chart != Chart::One {
            return Err(Error::OutOfDomain(
                "transition_minus_inverse expects chart 1".into(),
            ));
        }
        self.check_chart(pt)?;
        let zn = pt.z.norm();
        if !(zn > self.lambda1() && zn < 1.0 && pt.xi.norm() < self.u1_radius) {
            return Err(Error::OutOfDomain("outside the i^- overlap".into()));
        }
        Ok(SurfacePoint::new(Chart::Two, pt.z, pt.xi))
    }

    /// i^+: chart 2 -> chart 1 on 1 < |z| < lambda_2, (z, xi) |->
    /// (lambda z, f(xi)).
    pub fn transition_plus(&self, pt: &SurfacePoint) -> Result<SurfacePoint> {
        if pt.chart != Chart::Two {
            return Err(Error::OutOfDomain("transition_plus expects chart 2".into()));
        }
        self.check_chart(pt)?;
        let zn = pt.z.norm();
        if !(zn > 1.0 && zn < self.lambda2()) {
            return Err(Error::OutOfDomain(format!(
                "|z| = {zn:.6} outside the i^+ overlap (1, {})",
                self.lambda2()
            )));
        }
        let fxi = eval_f64(&self.coeffs64, pt.xi);
        if fxi.norm() >= self.v1_radius {
            return Err(Error::OutOfDomain(format!(
                "f(xi) lands outside V1 (|f(xi)| = {:.3e} >= {:.3e})",
                fxi.norm(),
                self.v1_radius
            )));
        }
        Ok(SurfacePoint::new(
            Chart::One,
            pt.z * self.lambda,
            fxi,
        ))
    }

    /// Inverse of i^+: chart 1 -> chart 2, applying z/lambda and the
    /// local branch of f^{-1} (Newton from the truncated inverse).
    pub fn transition_plus_inverse(&self, pt: &SurfacePoint) -> Result<SurfacePoint> {
        if pt.chart != Chart::One {
            return Err(Error::OutOfDomain(
                "transition_plus_inverse expects chart 1".into(),
            ));
        }
        self.check_chart(pt)?;
        let zn = pt.z.norm();
        if !(zn > self.lambda && zn < self.lambda * self.lambda2()) {
            return Err(Error::OutOfDomain("outside the image of the i^+ band".into()));
        }
        if pt.xi.norm() >= self.v1_radius {
            return Err(Error::OutOfDomain("xi outside V1".into()));
        }
        if self.f.tau().is_zero() {
            return Err(Error::Precondition(
                "local inverse branch needs tau != 0".into(),
            ));
        }
        // Newton on f(w) = xi from w = xi / tau.
        let tau = to_c64(self.f.tau());
        let mut w = pt.xi / tau;
        for _ in 0..64 {
            let (fw, dfw) = horner_both64(&self.coeffs64, w);
            if dfw.norm() < 1e-300 {
                return Err(Error::NonConvergence("critical point in f^{-1}".into()));
            }
            let step = (fw - pt.xi) / dfw;
            w -= step;
            if step.norm() < 1e-16 * (1.0 + w.norm()) {
                break;
            }
        }
        Ok(SurfacePoint::new(Chart::Two, pt.z / self.lambda, w))
    }

    /// Phi(p) = log|h^{-1}(xi)| + a log|z| in the chart's own
    /// coordinates.
    pub fn eval_phi(&self, pt: &SurfacePoint) -> Result<f64> {
        if self.mode != ExponentMode::Phi {
            return Err(Error::Precondition("model is not in Phi mode".into()));
        }
        self.check_chart(pt)?;
        if pt.xi.norm() == 0.0 {
            return Err(Error::OutOfDomain(
                "Phi is singular on the leaf xi = 0".into(),
            ));
        }
        let lin = self.linearized(pt.xi)?;
        Ok(lin.norm().ln() + self.a * pt.z.norm().ln())
    }

    /// h^{-1}(xi), with the certification radius enforced for nonlinear
    /// germs.
    pub fn linearized(&self, xi: Complex64) -> Result<Complex64> {
        match &self.h_inv64 {
            None => Ok(xi),
            Some(h) => {
                if xi.norm() > self.cert_radius {
                    return Err(Error::SeedRejected {
                        admissible_radius: self.cert_radius,
                    });
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for b in h.iter().rev() {
                    acc = acc * xi + b;
                }
                Ok(acc * xi)
            }
        }
    }

    /// G(p) = g(xi) |z|^a; 0 (flagged) when xi is not certified escaping.
    pub fn eval_g(&self, pt: &SurfacePoint) -> Result<(f64, GreenEvaluation)> {
        if self.mode != ExponentMode::Green {
            return Err(Error::Precondition("model is not in Green mode".into()));
        }
        self.check_chart(pt)?;
        let ge = green(&self.f, pt.xi, self.green_budget)?;
        Ok((ge.value * pt.z.norm().powf(self.a), ge))
    }
}

fn eval_f64(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut p = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        p = p * z + c;
    }
    p * z
}

fn horner_both64(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate().rev() {
        p = p * z + c;
        dp = dp * z + c * ((k + 1) as f64);
    }
    (p * z, dp)
}

/// sum_{k>=2} k |c_k| r^{k-1}: bound on |f' - tau| over |xi| <= r.
fn derivative_spread(coeffs: &[Complex64], r: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| (i + 1) as f64 * c.norm() * r.powi(i as i32))
        .sum()
}

/// sum_k |c_k| r^k: sup of |f| over |xi| <= r.
fn sup_norm(coeffs: &[Complex64], r: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm() * r.powi(i as i32 + 1))
        .sum()
}

/// Lower bound on the radius of a disk covered by f(|xi| < r): the best
/// single-term minimum-modulus bound over the boundary circle.
fn covered_radius(coeffs: &[Complex64], r: f64) -> f64 {
    let mut best: f64 = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let own = c.norm() * r.powi(i as i32 + 1);
        let others: f64 = coeffs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, cj)| cj.norm() * r.powi(j as i32 + 1))
            .sum();
        best = best.max(own - others);
    }
    best
}

/// Largest dyadic-bisection value in (0, hi] satisfying the monotone
/// predicate.
fn bisect_max(hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    if ok(hi) {
        return hi;
    }
    let mut lo = 0.0;
    let mut hi = hi;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LaplacianSample {
    pub h: f64,
    pub lap_z: f64,
    pub lap_xi: Option<f64>,
    /// Sum of stencil magnitudes over h^2: the natural scale for the
    /// rounding floor of the five-point stencil.
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeFunction {
    Phi,
    LogG,
}

/// Five-point-stencil Laplacians at decreasing grid spacings, taken in
/// the uniformizing coordinates: w = log z on the leaf direction (the
/// flat chart of the torus) and v = log xi transversally. Harmonicity
/// is conformally invariant, and in these charts the linear-germ Phi
/// and the leafwise log G are affine, so their stencils sit at rounding
/// scale; a raw coordinate stencil would carry an O(h^2) quartic term
/// even for exactly harmonic functions.
///
/// Phi probes both directions (pluriharmonic after the linearizing
/// substitution); log G probes the leaf direction only with xi frozen.
pub fn laplacian_probe(
    model: &SurfaceModel,
    function: ProbeFunction,
    pt: &SurfacePoint,
    leaf_fixed: bool,
    h_steps: &[f64],
) -> Result<Vec<LaplacianSample>> {
    if function == ProbeFunction::LogG && !leaf_fixed {
        return Err(Error::Precondition(
            "log G harmonicity is leafwise: xi must stay frozen".into(),
        ));
    }
    let mut out = Vec::with_capacity(h_steps.len());

    // For log G the leaf value g(xi) enters every stencil point once.
    let g_cached = if function == ProbeFunction::LogG {
        let (_, ge) = model.eval_g(pt)?;
        if ge.indeterminate || ge.value <= 0.0 {
            return Err(Error::Precondition(
                "log G probe needs a certified escaping xi".into(),
            ));
        }
        Some(ge.value)
    } else {
        None
    };

    let eval = |z: Complex64, xi: Complex64| -> Result<f64> {
        let p = SurfacePoint::new(pt.chart, z, xi);
        match function {
            ProbeFunction::Phi => model.eval_phi(&p),
            ProbeFunction::LogG => {
                model.check_chart(&p)?;
                Ok(g_cached.unwrap().ln() + model.a * z.norm().ln())
            }
        }
    };

    for &h in h_steps {
        let offsets = [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)];
        let center = eval(pt.z, pt.xi)?;
        let mut sum_z = -4.0 * center;
        let mut mag = 4.0 * center.abs();
        for (da, db) in offsets {
            let w = pt.z * Complex64::new(da, db).exp();
            let v = eval(w, pt.xi)?;
            sum_z += v;
            mag += v.abs();
        }
        let lap_z = sum_z / (h * h);
        let lap_xi = if function == ProbeFunction::Phi && !leaf_fixed {
            let mut sum_xi = -4.0 * center;
            for (da, db) in offsets {
                let x = pt.xi * Complex64::new(da, db).exp();
                let v = eval(pt.z, x)?;
                sum_xi += v;
                mag += v.abs();
            }
            Some(sum_xi / (h * h))
        } else {
            None
        };
        out.push(LaplacianSample {
            h,
            lap_z,
            lap_xi,
            scale: mag / (h * h),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceCheckReport {
    pub mode: ExponentMode,
    /// Residual of lambda^a |tau| = 1 (phi) or lambda^a d = 1 (green).
    #[serde(rename = "exponent_identities")]
    pub exponent_identity_residual: f64,
    pub gluing_max_residual: f64,
    pub samples: u32,
    pub laplacian_convergence_order: Option<f64>,
    pub laplacian_max_abs: f64,
    /// Every gluing comparison stayed within the declared tolerance.
    pub gluing_tolerance: f64,
    pub gluing_ok: bool,
}

/// Randomized gluing certificate plus harmonicity summary.
///
/// `xi_radius` bounds the sampled xi in the i^+ band (truncation error
/// of the linearizer grows with it); `tolerance` is the declared gluing
/// bound recorded in the report.
pub fn surface_check(
    model: &SurfaceModel,
    samples: u32,
    xi_radius: f64,
    tolerance: f64,
    seed: u64,
) -> Result<SurfaceCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = match model.mode {
        ExponentMode::Phi => cabs_f64(model.f.tau()),
        ExponentMode::Green => model.f.degree() as f64,
    };
    let exponent_identity_residual = (model.lambda.powf(model.a) * factor - 1.0).abs();

    let mut gluing_max = 0.0f64;
    let mut done = 0u32;
    let mut attempts = 0u32;
    while done < samples && attempts < samples * 50 {
        attempts += 1;
        // Alternate the two overlap bands.
        let plus_band = done.is_multiple_of(2);
        let zr = if plus_band {
            rng.gen_range(1.0 + 1e-6..model.lambda2() - 1e-6)
        } else {
            rng.gen_range(model.lambda1() + 1e-6..1.0 - 1e-6)
        };
        let z = Complex64::from_polar(zr, rng.gen_range(0.0..2.0 * std::f64::consts::PI));
        let xr = rng.gen_range(xi_radius * 1e-3..xi_radius);
        let xi = Complex64::from_polar(xr, rng.gen_range(0.0..2.0 * std::f64::consts::PI));
        let pt = SurfacePoint::new(Chart::Two, z, xi);
        if model.check_chart(&pt).is_err() {
            continue;
        }
        let direct = match model.mode {
            ExponentMode::Phi => model.eval_phi(&pt),
            ExponentMode::Green => model.eval_g(&pt).map(|(v, _)| v),
        };
        let Ok(direct) = direct else { continue };
        let image = if plus_band {
            model.transition_plus(&pt)
        } else {
            model.transition_minus(&pt)
        };
        let Ok(image) = image else { continue };
        let via = match model.mode {
            ExponentMode::Phi => model.eval_phi(&image),
            ExponentMode::Green => model.eval_g(&image).map(|(v, _)| v),
        };
        let Ok(via) = via else { continue };
        gluing_max = gluing_max.max((direct - via).abs());
        done += 1;
    }
    if done < samples {
        return Err(Error::NonConvergence(format!(
            "only {done}/{samples} gluing samples landed in the overlap"
        )));
    }

    // Harmonicity: probe at a generic interior point.
    let probe_pt = SurfacePoint::new(
        Chart::One,
        Complex64::from_polar(0.5 * (model.lambda + 1.0), 0.7),
        Complex64::from_polar(
            (model.cert_radius * 0.5).min(model.rho * 0.5),
            0.3,
        ),
    );
    let h_steps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let (order, max_abs) = match model.mode {
        ExponentMode::Phi => {
            let samples = laplacian_probe(model, ProbeFunction::Phi, &probe_pt, false, &h_steps)?;
            (fit_order(&samples), max_lap(&samples))
        }
        ExponentMode::Green => {
            // leafwise log G at an escaping xi
            let xi = Complex64::new(escape_sample(model), 0.0);
            let pt = SurfacePoint::new(Chart::One, probe_pt.z, xi);
            let samples = laplacian_probe(model, ProbeFunction::LogG, &pt, true, &h_steps)?;
            (None, max_lap(&samples))
        }
    };

    Ok(SurfaceCheckReport {
        mode: model.mode,
        exponent_identity_residual,
        gluing_max_residual: gluing_max,
        samples: done,
        laplacian_convergence_order: order,
        laplacian_max_abs: max_abs,
        gluing_tolerance: tolerance,
        gluing_ok: gluing_max <= tolerance,
    })
}

fn max_lap(samples: &[LaplacianSample]) -> f64 {
    samples
        .iter()
        .flat_map(|s| [s.lap_z.abs(), s.lap_xi.map(|v| v.abs()).unwrap_or(0.0)])
        .fold(0.0, f64::max)
}

/// Least-squares slope of ln|lap| against ln h (the discretization
/// order), using whichever direction carries signal.
fn fit_order(samples: &[LaplacianSample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| {
            let v = s.lap_xi.map(|x| x.abs()).unwrap_or(0.0).max(s.lap_z.abs());
            (v > 0.0).then(|| (s.h.ln(), v.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    (denom.abs() > 1e-12).then(|| (n * sxy - sx * sy) / denom)
}

/// An escaping xi inside U0 for Green-mode probes.
fn escape_sample(model: &SurfaceModel) -> f64 {
    let mut r = model.rho * 0.9;
    for _ in 0..40 {
        let ge = green(&model.f, Complex64::new(r, 0.0), 4096);
        if let Ok(g) = ge {
            if !g.indeterminate && g.value > 0.0 {
                return r;
            }
        }
        r *= 0.97;
    }
    model.rho * 0.9
}
