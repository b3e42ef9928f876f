//! Accelerated gradient projection with negative-curvature exploitation.
//!
//! [`a_agp`] minimizes the regularized surrogate `f̂(x) = f(x) + α‖x − x̄‖²`
//! with [`agp_upg`], an accelerated projected method that runs until it either
//! makes certified progress or finds a pair of points proving that `f̂` is not
//! `α`-strongly convex (an NC pair). An NC pair is then turned into descent on
//! `f` by a short step along the pair's direction.

use crate::error::{Result, SloError};
use crate::oracle::{Evaluator, Objective};
use crate::vector::Vector;

/// `f̂(x) = f(x) + agp_alpha·‖x − anchor_xbar‖²`, exact.
pub struct AugmentedOracle<'a> {
    base: &'a dyn Objective,
    anchor_xbar: Vector,
    agp_alpha: f64,
}

impl<'a> AugmentedOracle<'a> {
    pub fn new(base: &'a dyn Objective, anchor_xbar: Vector, agp_alpha: f64) -> Self {
        Self {
            base,
            anchor_xbar,
            agp_alpha,
        }
    }

    pub fn agp_alpha(&self) -> f64 {
        self.agp_alpha
    }

    pub fn anchor_xbar(&self) -> &Vector {
        &self.anchor_xbar
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        let sq: f64 = x
            .iter()
            .zip(self.anchor_xbar.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        self.agp_alpha * sq
    }

    fn add_penalty_gradient(&self, x: &[f64], mut g: Vec<f64>) -> Vec<f64> {
        let s = 2.0 * self.agp_alpha;
        for ((gi, xi), ci) in g.iter_mut().zip(x).zip(self.anchor_xbar.iter()) {
            *gi += s * (xi - ci);
        }
        g
    }
}

impl Objective for AugmentedOracle<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.base.value(x) + self.penalty(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.add_penalty_gradient(x, self.base.gradient(x))
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.base.value_and_gradient(x);
        (v + self.penalty(x), self.add_penalty_gradient(x, g))
    }
}

/// The closed ball `X = B(center, inner_radius)` the accelerated iterates live in.
#[derive(Debug, Clone, PartialEq)]
pub struct AgpRegion {
    pub center: Vector,
    pub inner_radius: f64,
}

impl AgpRegion {
    pub fn new(center: Vector, inner_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius.is_finite()) {
            return Err(SloError::Contract(format!(
                "region radius must be positive, got {inner_radius}"
            )));
        }
        Ok(Self {
            center,
            inner_radius,
        })
    }

    /// Strict interior test `‖x − center‖ < inner_radius`.
    pub fn is_interior(&self, x: &Vector) -> bool {
        x.dist(&self.center) < self.inner_radius
    }

    pub fn project(&self, x: &Vector) -> Vector {
        x.project_to_ball(&self.center, self.inner_radius)
    }
}

/// A point whose augmented value and gradient are already known.
#[derive(Debug, Clone)]
struct Probe {
    x: Vector,
    f: f64,
    g: Vector,
}

/// A point whose augmented value is known.
#[derive(Debug, Clone)]
struct Valued {
    x: Vector,
    f: f64,
}

fn nc_violated(u: &Valued, v: &Probe, alpha: f64) -> bool {
    let diff = u.x.sub(&v.x);
    u.f < v.f + v.g.dot(&diff) + 0.5 * alpha * diff.norm_sq()
}

fn scan_nc(
    x_hist: &[Probe],
    y_hist: &[Valued],
    w: &Valued,
    alpha: f64,
) -> Option<(Vector, Vector)> {
    for (v, yj) in x_hist.iter().zip(y_hist) {
        for u in [yj, w] {
            if nc_violated(u, v, alpha) {
                return Some((u.x.clone(), v.x.clone()));
            }
        }
    }
    None
}

/// Scans `j = 0, 1, …` and `u ∈ {ŷ_j, w}` for the first pair with
/// `f̂(u) < f̂(x̂_j) + ⟨∇f̂(x̂_j), u − x̂_j⟩ + (α/2)‖u − x̂_j‖²`,
/// returning `(u, x̂_j)`.
pub fn find_nc_pair(
    f_hat: &Evaluator<'_>,
    x_hist: &[Vector],
    y_hist: &[Vector],
    w: &Vector,
    alpha: f64,
) -> Result<Option<(Vector, Vector)>> {
    if x_hist.len() != y_hist.len() {
        return Err(SloError::Contract(format!(
            "history lengths differ: {} vs {}",
            x_hist.len(),
            y_hist.len()
        )));
    }
    let xs = x_hist
        .iter()
        .map(|x| {
            let (f, g) = f_hat.value_and_gradient(x)?;
            Ok(Probe { x: x.clone(), f, g })
        })
        .collect::<Result<Vec<_>>>()?;
    let ys = y_hist
        .iter()
        .map(|y| {
            Ok(Valued {
                x: y.clone(),
                f: f_hat.value(y)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let w = Valued {
        x: w.clone(),
        f: f_hat.value(w)?,
    };
    Ok(scan_nc(&xs, &ys, &w, alpha))
}

/// A point returned by the progress certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vector,
    /// True when the point is the projection onto the region's sphere.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub witness: Option<Witness>,
    /// `ψ(z) = f̂(ŷ₀) − f̂(z) + (α/2)‖z − ŷ₀‖²` when it was computed.
    pub psi: Option<f64>,
    /// `f̂(z)` when `z` was evaluated.
    f_z: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn certify_inner(
    f_hat: &Evaluator<'_>,
    region: &AgpRegion,
    y0: &Valued,
    yt: &Probe,
    l1_hat: f64,
    alpha: f64,
    kappa: f64,
    t: usize,
) -> Result<Certificate> {
    if yt.f > y0.f {
        return Ok(Certificate {
            witness: Some(Witness {
                point: y0.x.clone(),
                on_boundary: false,
            }),
            psi: None,
            f_z: None,
        });
    }
    let z = yt.x.add_scaled(-1.0 / l1_hat, &yt.g);
    if !region.is_interior(&z) {
        return Ok(Certificate {
            witness: Some(Witness {
                point: region.project(&z),
                on_boundary: true,
            }),
            psi: None,
            f_z: None,
        });
    }
    let f_z = f_hat.value(&z)?;
    let psi = y0.f - f_z + 0.5 * alpha * z.dist(&y0.x).powi(2);
    let threshold = 2.0 * l1_hat * psi * (-(t as f64) / kappa.sqrt()).exp();
    let witness = (yt.g.norm_sq() > threshold).then_some(Witness {
        point: z,
        on_boundary: false,
    });
    Ok(Certificate {
        witness,
        psi: Some(psi),
        f_z: Some(f_z),
    })
}

/// Progress certificate for iterate `ŷ_t`: returns `ŷ₀` if `f̂` went up, the
/// projected gradient point if a gradient step from `ŷ_t` leaves `int(X)`,
/// the gradient point `z` if the gradient is too large for the accelerated
/// rate, and no witness otherwise.
#[allow(clippy::too_many_arguments)]
pub fn certify_progress(
    f_hat: &Evaluator<'_>,
    region: &AgpRegion,
    y0: &Vector,
    yt: &Vector,
    l1_hat: f64,
    alpha: f64,
    kappa: f64,
    t: usize,
) -> Result<Certificate> {
    if t == 0 {
        return Err(SloError::Contract(
            "certificate iteration index must be at least 1".into(),
        ));
    }
    let y0 = Valued {
        x: y0.clone(),
        f: f_hat.value(y0)?,
    };
    let (f, g) = f_hat.value_and_gradient(yt)?;
    let yt = Probe {
        x: yt.clone(),
        f,
        g,
    };
    certify_inner(f_hat, region, &y0, &yt, l1_hat, alpha, kappa, t)
}

/// One iteration of [`agp_upg`], for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct UpgTraceEntry {
    pub t: usize,
    pub f_hat_y: f64,
    pub grad_norm_y: f64,
    pub dist_y: f64,
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpgPayload {
    /// Flags 1, 3 and 5.
    Point(Vector),
    /// Flags 2 and 4; `y_history` is `ŷ₀, …, ŷ_t`.
    NcPair {
        u: Vector,
        v: Vector,
        y_history: Vec<Vector>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpgOutcome {
    /// Outcome class in `1..=5`.
    pub flag: u8,
    pub payload: UpgPayload,
    /// Iteration count `t` at exit.
    pub iterations: usize,
    /// Augmented gradient evaluations spent.
    pub grad_evals: u64,
    /// `ψ` from the last certificate that returned no witness.
    pub last_psi: Option<f64>,
    /// `1 + max{0, √κ·log(2L̂₁ψ/ε̂)}` with `ψ` from iteration `t − 1`; `1` when `t = 1`.
    pub iteration_bound: f64,
    pub trace: Vec<UpgTraceEntry>,
}

impl UpgOutcome {
    pub fn point(&self) -> Option<&Vector> {
        match &self.payload {
            UpgPayload::Point(p) => Some(p),
            UpgPayload::NcPair { .. } => None,
        }
    }

    pub fn nc_pair(&self) -> Option<(&Vector, &Vector)> {
        match &self.payload {
            UpgPayload::NcPair { u, v, .. } => Some((u, v)),
            UpgPayload::Point(_) => None,
        }
    }
}

fn iteration_bound(kappa: f64, l1_hat: f64, psi: f64, eps_hat: f64) -> f64 {
    let log = (2.0 * l1_hat * psi / eps_hat).ln();
    1.0 + (kappa.sqrt() * log).max(0.0)
}

/// Accelerated projected gradient on `f̂` over `X`, run until proven guilty.
///
/// `f_hat` must evaluate the augmented objective. The loop is capped at
/// `max(10⁴, 10·bound)` iterations, with the bound taken from the first
/// certificate; exceeding it means the constants were under-estimated.
pub fn agp_upg(
    f_hat: &Evaluator<'_>,
    region: &AgpRegion,
    y0: &Vector,
    eps_hat: f64,
    l1_hat: f64,
    alpha: f64,
) -> Result<UpgOutcome> {
    if !(alpha > 0.0 && l1_hat >= alpha && eps_hat > 0.0) {
        return Err(SloError::Contract(format!(
            "need l1_hat >= alpha > 0 and eps_hat > 0, got {l1_hat}, {alpha}, {eps_hat}"
        )));
    }
    if !region.is_interior(y0) {
        return Err(SloError::Contract(
            "accelerated start point is not interior".into(),
        ));
    }
    let start_evals = f_hat.grad_evals();
    let kappa = l1_hat / alpha;
    let omega = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
    let grad_tol = eps_hat.sqrt();

    let y0v = Valued {
        x: y0.clone(),
        f: f_hat.value(y0)?,
    };
    let mut x_hist: Vec<Probe> = Vec::new();
    let mut y_hist: Vec<Valued> = vec![y0v.clone()];
    let mut x_next = y0.clone();
    let mut trace = Vec::new();
    let mut last_psi: Option<f64> = None;
    let mut cap: usize = 10_000;

    let finish = |flag: u8,
                  payload: UpgPayload,
                  t: usize,
                  last_psi: Option<f64>,
                  trace: Vec<UpgTraceEntry>| {
        let bound = match (t, last_psi) {
            (1, _) | (_, None) => 1.0,
            (_, Some(psi)) => iteration_bound(kappa, l1_hat, psi, eps_hat),
        };
        UpgOutcome {
            flag,
            payload,
            iterations: t,
            grad_evals: f_hat.grad_evals() - start_evals,
            last_psi,
            iteration_bound: bound,
            trace,
        }
    };
    let history = |y_hist: &[Valued], last: &Vector| {
        let mut ys: Vec<Vector> = y_hist.iter().map(|y| y.x.clone()).collect();
        ys.push(last.clone());
        ys
    };

    let mut t = 1;
    loop {
        let (fx, gx) = f_hat.value_and_gradient(&x_next)?;
        let y_tilde = x_next.add_scaled(-1.0 / l1_hat, &gx);
        x_hist.push(Probe {
            x: x_next,
            f: fx,
            g: gx,
        });

        if !region.is_interior(&y_tilde) {
            let yt = region.project(&y_tilde);
            let f_yt = f_hat.value(&yt)?;
            trace.push(UpgTraceEntry {
                t,
                f_hat_y: f_yt,
                grad_norm_y: f64::NAN,
                dist_y: yt.dist(&region.center),
                psi: None,
            });
            if f_yt <= y0v.f {
                return Ok(finish(1, UpgPayload::Point(yt), t, last_psi, trace));
            }
            let (u, v) = scan_nc(&x_hist, &y_hist, &y0v, alpha)
                .ok_or(SloError::NcPairMissing { flag: 2 })?;
            let y_history = history(&y_hist, &yt);
            return Ok(finish(
                2,
                UpgPayload::NcPair { u, v, y_history },
                t,
                last_psi,
                trace,
            ));
        }

        let yt = y_tilde;
        let prev = &y_hist.last().expect("y history starts with y0").x;
        x_next = yt.add_scaled(omega, &yt.sub(prev));
        let (f_yt, g_yt) = f_hat.value_and_gradient(&yt)?;
        let probe = Probe {
            x: yt.clone(),
            f: f_yt,
            g: g_yt,
        };
        let cert = certify_inner(f_hat, region, &y0v, &probe, l1_hat, alpha, kappa, t)?;
        let grad_norm = probe.g.norm();
        trace.push(UpgTraceEntry {
            t,
            f_hat_y: f_yt,
            grad_norm_y: grad_norm,
            dist_y: yt.dist(&region.center),
            psi: cert.psi,
        });

        if let Some(w) = cert.witness {
            if w.on_boundary {
                return Ok(finish(3, UpgPayload::Point(w.point), t, last_psi, trace));
            }
            let f_w = match cert.f_z {
                Some(f) if cert.psi.is_some() => f,
                _ => y0v.f,
            };
            let wv = Valued { x: w.point, f: f_w };
            let (u, v) =
                scan_nc(&x_hist, &y_hist, &wv, alpha).ok_or(SloError::NcPairMissing { flag: 4 })?;
            let y_history = history(&y_hist, &yt);
            return Ok(finish(
                4,
                UpgPayload::NcPair { u, v, y_history },
                t,
                last_psi,
                trace,
            ));
        }
        if grad_norm <= grad_tol {
            return Ok(finish(5, UpgPayload::Point(yt), t, last_psi, trace));
        }

        if t == 1 {
            if let Some(psi) = cert.psi {
                let bound = iteration_bound(kappa, l1_hat, psi, eps_hat);
                if bound.is_finite() {
                    cap = cap.max((10.0 * bound).ceil() as usize);
                }
            }
        }
        last_psi = cert.psi;
        y_hist.push(Valued { x: yt, f: f_yt });
        t += 1;
        if t > cap {
            return Err(SloError::UpgSafetyCap {
                cap,
                trace: Box::new(trace),
            });
        }
    }
}

/// Result of one accelerated subroutine call.
#[derive(Debug, Clone, PartialEq)]
pub struct AgpOutput {
    pub point: Vector,
    pub flag: u8,
    pub upg_iterations: usize,
    pub iteration_bound: f64,
    /// Penalty weight `α = 2√L₂·ε^{1/4}` used for the call.
    pub agp_alpha: f64,
    /// The NC pair `(u, v)` for flags 2 and 4.
    pub nc_pair: Option<(Vector, Vector)>,
}

/// One accelerated step from `xbar` inside the epoch ball `B(epoch_anchor, radius_d)`.
///
/// Uses `α = 2√l2·ε^{1/4}`, `X = B(epoch_anchor, radius_d − 2ε^{1/4})`,
/// `ε̂ = ε/100` and `L̂₁ = l1 + 2α`. Point outcomes are returned directly; for
/// an NC pair `(u, v)` the best of the visited iterates and `u` is returned if
/// it beats `f(xbar) − α³/(64·l2²)`, otherwise the better of
/// `u ± α(u − v)/(l2‖u − v‖)`.
pub fn a_agp(
    ev: &Evaluator<'_>,
    xbar: &Vector,
    l1: f64,
    l2: f64,
    epoch_anchor: &Vector,
    radius_d: f64,
    epsilon: f64,
) -> Result<AgpOutput> {
    if !(l1 >= 1.0 && l2 >= 1.0) {
        return Err(SloError::Contract(format!(
            "constants must be >= 1, got l1={l1}, l2={l2}"
        )));
    }
    let quarter = epsilon.powf(0.25);
    if !(radius_d >= 6.0 * quarter * (1.0 - 1e-12)) {
        return Err(SloError::Contract(format!(
            "radius {radius_d} is below 6 eps^(1/4) = {}",
            6.0 * quarter
        )));
    }
    let region = AgpRegion::new(epoch_anchor.clone(), radius_d - 2.0 * quarter)?;
    let agp_alpha = 2.0 * l2.sqrt() * quarter;
    let aug = AugmentedOracle::new(ev.objective(), xbar.clone(), agp_alpha);
    let aug_ev = Evaluator::new(&aug);
    let outcome = agp_upg(
        &aug_ev,
        &region,
        xbar,
        epsilon / 100.0,
        l1 + 2.0 * agp_alpha,
        agp_alpha,
    );
    ev.charge_gradients(aug_ev.grad_evals());
    ev.charge_values(aug_ev.value_evals());
    let outcome = outcome?;

    let mut nc_pair = None;
    let point = match outcome.payload {
        UpgPayload::Point(p) => p,
        UpgPayload::NcPair { u, v, y_history } => {
            let t = y_history.len() - 1;
            let mut best: Option<(f64, Vector)> = None;
            for b in y_history[1..t].iter().chain(std::iter::once(&u)) {
                let fb = ev.value(b)?;
                if best.as_ref().is_none_or(|(fv, _)| fb < *fv) {
                    best = Some((fb, b.clone()));
                }
            }
            let (f_b1, b1) = best.expect("candidate set contains u");
            let f_xbar = ev.value(xbar)?;
            let chosen = if f_b1 <= f_xbar - agp_alpha.powi(3) / (64.0 * l2 * l2) {
                b1
            } else {
                let diff = u.sub(&v);
                let dn = diff.norm();
                if !(dn > 0.0) {
                    return Err(SloError::DegenerateNcPair);
                }
                let step = agp_alpha / (l2 * dn);
                let plus = u.add_scaled(step, &diff);
                let minus = u.add_scaled(-step, &diff);
                if ev.value(&plus)? <= ev.value(&minus)? {
                    plus
                } else {
                    minus
                }
            };
            nc_pair = Some((u, v));
            chosen
        }
    };
    Ok(AgpOutput {
        point,
        flag: outcome.flag,
        upg_iterations: outcome.iterations,
        iteration_bound: outcome.iteration_bound,
        agp_alpha,
        nc_pair,
    })
}
