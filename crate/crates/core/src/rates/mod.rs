//! Shell-sampled estimates of steepest descent rates, steepest displacement
//! rates and calmness moduli.
//!
//! The punctured ball around `x̄` is cut into geometric shells
//! `(r_{k+1}, r_k]` with `r_k = r0·ρ^k`. Each shell contributes the extreme
//! ratio over its sample points, and the liminf (limsup) is read off the
//! innermost third of the shells.

mod oracle;
mod sampler;

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext;
use crate::mappings::{eval_single, Multifunction};
use crate::spaces::Norm;

pub use oracle::oracle_rate_grid;
pub(crate) use sampler::shell_points;

/// Anchors farther than this from the graph are rejected.
pub const ANCHOR_TOL: f64 = 1e-9;
/// Log-log slope at or below which shell extremes are read as `~ 1/r`.
pub const DIVERGENCE_SLOPE: f64 = -0.9;
/// Shell minima above `-1/CALM_TOL` count as bounded below.
pub const CALM_TOL: f64 = 1e-6;

/// Geometric shell schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSchedule {
    pub r0: f64,
    pub decay: f64,
    pub shells: usize,
    pub points: usize,
    pub seed: u64,
    /// Skip points whose evaluation fails instead of aborting.
    #[serde(default)]
    pub skip_eval_errors: bool,
}

impl Default for SamplingSchedule {
    fn default() -> Self {
        SamplingSchedule {
            r0: 0.5,
            decay: 0.6,
            shells: 10,
            points: 1024,
            seed: 20240601,
            skip_eval_errors: false,
        }
    }
}

impl SamplingSchedule {
    pub fn new(r0: f64, decay: f64, shells: usize, points: usize, seed: u64) -> Result<Self> {
        let s = SamplingSchedule {
            r0,
            decay,
            shells,
            points,
            seed,
            skip_eval_errors: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(Error::Schedule(format!("r0 must be positive, got {}", self.r0)));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::Schedule(format!("decay must lie in (0, 1), got {}", self.decay)));
        }
        if self.shells < 3 {
            return Err(Error::Schedule(format!("at least 3 shells are needed, got {}", self.shells)));
        }
        if self.points < 8 {
            return Err(Error::Schedule(format!("at least 8 points per shell are needed, got {}", self.points)));
        }
        if self.radius(self.shells) <= 1e-12 {
            return Err(Error::Schedule(format!(
                "innermost radius {:e} is below the noise floor 1e-12",
                self.radius(self.shells)
            )));
        }
        Ok(())
    }

    /// `r_k = r0·ρ^k`; shell `k` is `(r_{k+1}, r_k]`. Repeated
    /// multiplication rather than `powi`, whose rounding depends on whether
    /// the call is constant-folded.
    pub fn radius(&self, k: usize) -> f64 {
        (0..k).fold(self.r0, |r, _| r * self.decay)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.shells).map(|k| self.radius(k)).collect()
    }

    /// Outer radius of the innermost shell, `r_{K-1}`; the smallest radius
    /// at which points are guaranteed to be sampled.
    pub fn innermost_radius(&self) -> f64 {
        self.radius(self.shells - 1)
    }

    /// Number of innermost shells used for liminf extrapolation, `⌈K/3⌉`.
    pub fn tail_len(&self) -> usize {
        self.shells.div_ceil(3)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Parses `r0,decay,K,N`; the seed stays at its default.
impl FromStr for SamplingSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Schedule(format!("expected r0,decay,K,N, got `{s}`")));
        }
        let bad = |what: &str, v: &str| Error::Schedule(format!("invalid {what} `{v}`"));
        let r0 = parts[0].parse().map_err(|_| bad("r0", parts[0]))?;
        let decay = parts[1].parse().map_err(|_| bad("decay", parts[1]))?;
        let shells = parts[2].parse().map_err(|_| bad("shell count", parts[2]))?;
        let points = parts[3].parse().map_err(|_| bad("point count", parts[3]))?;
        SamplingSchedule::new(r0, decay, shells, points, SamplingSchedule::default().seed)
    }
}

/// Direction of the one-sided sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bias {
    /// A liminf estimate; sampled minima never undercut the true infimum.
    OverEstimatesLiminf,
    /// A limsup estimate; sampled maxima never exceed the true supremum.
    UnderEstimatesLimsup,
}

/// Shell-by-shell record of a liminf or limsup estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEstimate {
    /// `r_0 > r_1 > … > r_K`.
    #[serde(with = "ext::vec")]
    pub radii: Vec<f64>,
    #[serde(with = "ext::vec")]
    pub shell_min: Vec<f64>,
    #[serde(with = "ext::vec")]
    pub shell_max: Vec<f64>,
    /// `min_{j≥k} m_j` for liminf estimates, `max_{j≥k} M_j` for limsup.
    #[serde(with = "ext::vec")]
    pub cumulative: Vec<f64>,
    #[serde(with = "ext::scalar")]
    pub extrapolated: f64,
    /// Value before the divergence rule: the minimum over the innermost
    /// `⌈K/3⌉` shells for liminf estimates, the innermost shell maximum for
    /// limsup estimates.
    #[serde(with = "ext::scalar")]
    pub tail_value: f64,
    /// Least-squares slope of `log` shell extreme against `log r_k`.
    #[serde(with = "ext::option")]
    pub log_slope: Option<f64>,
    /// Set when the slope is at most −0.9, read as growth like `1/r`.
    pub divergent: bool,
    pub bias: Bias,
    /// Argmin (liminf) or argmax (limsup) per shell.
    pub witnesses: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub calm_from_below: Option<bool>,
    pub skipped: usize,
    /// Absent for the exhaustive grid oracle.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schedule: Option<SamplingSchedule>,
}

impl RateEstimate {
    pub fn is_liminf(&self) -> bool {
        self.bias == Bias::OverEstimatesLiminf
    }

    /// Extreme ratio in shell `k` in the direction of the estimate.
    pub fn shell_value(&self, k: usize) -> f64 {
        if self.is_liminf() {
            self.shell_min[k]
        } else {
            self.shell_max[k]
        }
    }

    /// Extreme over the innermost `⌈K/3⌉` shells: the minimum for liminf
    /// estimates, the maximum for limsup estimates.
    pub fn window_value(&self) -> f64 {
        let k = self.cumulative.len();
        self.cumulative[k - k.div_ceil(3)]
    }

    /// One row per shell under the header
    /// `shell,radius,min_ratio,max_ratio,cumulative_min`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("shell,radius,min_ratio,max_ratio,cumulative_min\n");
        let mut cmin = vec![f64::INFINITY; self.shell_min.len()];
        let mut run = f64::INFINITY;
        for k in (0..self.shell_min.len()).rev() {
            run = run.min(self.shell_min[k]);
            cmin[k] = run;
        }
        for k in 0..self.shell_min.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                k, self.radii[k], self.shell_min[k], self.shell_max[k], cmin[k]
            ));
        }
        out
    }
}

struct ShellScan {
    min: f64,
    max: f64,
    argmin: Vec<f64>,
    argmax: Vec<f64>,
    skipped: usize,
}

pub(crate) type Ratio<'a> = dyn Fn(&[f64]) -> Result<f64> + Sync + 'a;

fn scan_shell(ratio: &Ratio, xbar: &[f64], norm: &Norm, s: &SamplingSchedule, k: usize) -> Result<ShellScan> {
    let mut sc = ShellScan {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: Vec::new(),
        argmax: Vec::new(),
        skipped: 0,
    };
    for x in shell_points(xbar, norm, s, k) {
        let v = match ratio(&x) {
            Ok(v) if !v.is_nan() => v,
            Ok(_) | Err(_) if s.skip_eval_errors => {
                sc.skipped += 1;
                continue;
            }
            Ok(_) => {
                return Err(Error::Evaluation {
                    witness: x,
                    shell: k,
                    message: "ratio is NaN".into(),
                })
            }
            Err(e) => {
                return Err(Error::Evaluation {
                    witness: x,
                    shell: k,
                    message: e.to_string(),
                })
            }
        };
        if sc.argmin.is_empty() || v < sc.min {
            sc.min = v;
            sc.argmin = x.clone();
        }
        if sc.argmax.is_empty() || v > sc.max {
            sc.max = v;
            sc.argmax = x;
        }
    }
    Ok(sc)
}

/// Least-squares slope of `log y` against `log x` when every `y` is finite
/// and positive.
pub(crate) fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 || y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub(crate) fn estimate(ratio: &Ratio, xbar: &[f64], norm: &Norm, s: &SamplingSchedule, bias: Bias) -> Result<RateEstimate> {
    s.validate()?;
    let scans: Vec<ShellScan> = (0..s.shells)
        .into_par_iter()
        .map(|k| scan_shell(ratio, xbar, norm, s, k))
        .collect::<Result<_>>()?;
    let liminf = bias == Bias::OverEstimatesLiminf;
    let shell_min: Vec<f64> = scans.iter().map(|c| c.min).collect();
    let shell_max: Vec<f64> = scans.iter().map(|c| c.max).collect();
    let values = if liminf { &shell_min } else { &shell_max };
    let pick = |a: f64, b: f64| if liminf { a.min(b) } else { a.max(b) };
    let mut cumulative = values.clone();
    for k in (0..s.shells - 1).rev() {
        cumulative[k] = pick(cumulative[k], cumulative[k + 1]);
    }
    let tail_value = if liminf {
        cumulative[s.shells - s.tail_len()]
    } else {
        values[s.shells - 1]
    };
    let radii = s.radii();
    let log_slope = log_log_slope(&radii[..s.shells], values);
    let divergent = log_slope.is_some_and(|v| v <= DIVERGENCE_SLOPE);
    Ok(RateEstimate {
        extrapolated: if divergent { f64::INFINITY } else { tail_value },
        tail_value,
        log_slope,
        divergent,
        bias,
        witnesses: scans
            .iter()
            .map(|c| if liminf { c.argmin.clone() } else { c.argmax.clone() })
            .collect(),
        calm_from_below: None,
        skipped: scans.iter().map(|c| c.skipped).sum(),
        radii,
        shell_min,
        shell_max,
        cumulative,
        schedule: Some(s.clone()),
    })
}

fn check_point(f: &dyn Multifunction, x: &[f64]) -> Result<()> {
    if x.len() != f.dim_in() {
        return Err(Error::dim("anchor", f.dim_in(), x.len()));
    }
    Ok(())
}

/// Sampled `liminf_{x→x̄} (φ(x) − φ(x̄)) / ‖x − x̄‖` for a scalar `φ`.
pub fn descent_rate(phi: &dyn Multifunction, xbar: &[f64], s: &SamplingSchedule) -> Result<RateEstimate> {
    check_point(phi, xbar)?;
    if phi.dim_out() != 1 {
        return Err(Error::dim("descent rate of a scalar function", 1, phi.dim_out()));
    }
    let f0 = eval_single(phi, xbar)?[0];
    if !f0.is_finite() {
        return Err(Error::invalid(format!("φ(x̄) = {f0} is not finite")));
    }
    let norm = phi.norm_in().clone();
    let ratio = |x: &[f64]| -> Result<f64> { Ok((eval_single(phi, x)?[0] - f0) / norm.dist(x, xbar)) };
    let mut est = estimate(&ratio, xbar, &norm, s, Bias::OverEstimatesLiminf)?;
    est.calm_from_below = Some(est.shell_min.iter().all(|m| *m >= -1.0 / CALM_TOL));
    Ok(est)
}

/// `dist(ȳ, F(x̄))`, failing when it exceeds the anchor tolerance.
pub fn check_anchor(f: &dyn Multifunction, xbar: &[f64], ybar: &[f64]) -> Result<f64> {
    check_point(f, xbar)?;
    if ybar.len() != f.dim_out() {
        return Err(Error::dim("anchor value", f.dim_out(), ybar.len()));
    }
    let d = f.dist_to_image(ybar, xbar)?;
    if d > ANCHOR_TOL {
        return Err(Error::AnchorOffGraph { dist: d });
    }
    Ok(d)
}

/// Sampled `liminf_{x→x̄} dist(ȳ, F(x)) / ‖x − x̄‖`.
pub fn displacement_rate(f: &dyn Multifunction, xbar: &[f64], ybar: &[f64], s: &SamplingSchedule) -> Result<RateEstimate> {
    check_anchor(f, xbar, ybar)?;
    let norm = f.norm_in().clone();
    let ratio = |x: &[f64]| -> Result<f64> { Ok(f.dist_to_image(ybar, x)? / norm.dist(x, xbar)) };
    estimate(&ratio, xbar, &norm, s, Bias::OverEstimatesLiminf)
}

/// Sampled `limsup_{x→x̄} ‖g(x) − g(x̄)‖ / ‖x − x̄‖` for single-valued `g`.
pub fn calmness_modulus_sv(g: &dyn Multifunction, xbar: &[f64], s: &SamplingSchedule) -> Result<RateEstimate> {
    check_point(g, xbar)?;
    let g0 = eval_single(g, xbar)?;
    let (nin, nout) = (g.norm_in().clone(), g.norm_out().clone());
    let ratio = |x: &[f64]| -> Result<f64> { Ok(nout.dist(&eval_single(g, x)?, &g0) / nin.dist(x, xbar)) };
    estimate(&ratio, xbar, &nin, s, Bias::UnderEstimatesLimsup)
}
