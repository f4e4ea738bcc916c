//! Gallager exponents for matched and mismatched decoding and the
//! resulting random-coding bounds.
//!
//! With a uniform input over the constellation `X`, the exponent is
//!
//! ```text
//! E0(s, ρ) = -log2 E[ ( E[ (q(X', Y) / q(X, Y))^s | X, Y ] )^ρ ]
//! ```
//!
//! where `Y ~ W(· | X; h)` is drawn under the true gain and the metric `q`
//! is the Gaussian density evaluated with the decoder's gain (`ĥ` when
//! mismatched, `h` when matched). The inner expectation over `X'` is an
//! exact finite sum; the outer expectation over the noise uses a
//! Gauss-Hermite tensor rule or Monte Carlo. All accumulation happens in
//! the log domain.

use std::f64::consts::{LN_2, PI};

use rand_distr::{Distribution, StandardNormal};

use crate::bpsk;
use crate::constellation::Constellation;
use crate::frame::ChannelEstimate;
use crate::optimize::{golden_max, grid_golden_max};
use crate::quadrature::GaussHermite;
use crate::special::log_sum_exp;
use crate::{rng, Complex, Error, Result};

/// Gaussian transition density `W(y | x; g)` with per-dimension variance
/// `sigma2`.
pub fn gaussian_metric(y: Complex, x: Complex, g: Complex, sigma2: f64) -> f64 {
    log_gaussian_metric(y, x, g, sigma2).exp()
}

/// Natural log of [`gaussian_metric`].
pub fn log_gaussian_metric(y: Complex, x: Complex, g: Complex, sigma2: f64) -> f64 {
    -(2.0 * PI * sigma2).ln() - (y - g * x).norm_sqr() / (2.0 * sigma2)
}

/// Back end for the expectation over the channel noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Gauss-Hermite rule of the given order per real dimension.
    GaussHermite { order: usize },
    /// Monte Carlo over `samples` complex noise draws.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Integrator {
    /// 64 nodes for BPSK (one effective dimension), 32 x 32 otherwise.
    pub fn default_for(constellation: &Constellation) -> Self {
        if constellation.is_bpsk() {
            Integrator::GaussHermite { order: 64 }
        } else {
            Integrator::GaussHermite { order: 32 }
        }
    }

    /// Default Monte Carlo fallback.
    pub fn monte_carlo(seed: u64) -> Self {
        Integrator::MonteCarlo { samples: 200_000, seed }
    }

    /// A coarser rule of the same kind, used to estimate quadrature error.
    fn coarser(self) -> Option<Self> {
        match self {
            Integrator::GaussHermite { order } if order >= 8 => {
                Some(Integrator::GaussHermite { order: order * 3 / 4 })
            }
            _ => None,
        }
    }
}

/// Decoding metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// The decoder knows the true gain.
    Matched,
    /// The decoder uses the estimate in place of the true gain.
    Mismatched(ChannelEstimate),
}

/// Strategy for the maximization over `ρ` (and `s`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    /// 21-point coarse grid plus golden-section on `ρ`; nested
    /// golden-section on `log s` for mismatched metrics.
    #[default]
    GoldenSection,
    /// Safeguarded Newton iterations driven by analytic first and second
    /// derivatives computed in the same quadrature pass.
    Newton,
}

/// An exponent value with its Monte Carlo standard error (zero for
/// quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E0Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Noise nodes in units of the per-dimension standard deviation, with
/// probability weights.
#[derive(Debug, Clone)]
enum Rule {
    Line(Vec<(f64, f64)>),
    Plane { nodes: Vec<(Complex, f64)>, monte_carlo: bool },
}

impl Rule {
    fn line(order: usize) -> Self {
        Rule::Line(GaussHermite::new(order).standard_normal().collect())
    }

    fn plane(integrator: Integrator) -> Self {
        match integrator {
            Integrator::GaussHermite { order } => {
                let line: Vec<(f64, f64)> = GaussHermite::new(order).standard_normal().collect();
                let mut nodes = Vec::with_capacity(order * order);
                for &(a, wa) in &line {
                    // products of the outermost weights underflow for large orders
                    for &(b, wb) in line.iter().filter(|&&(_, wb)| wa * wb > 0.0) {
                        nodes.push((Complex::new(a, b), wa * wb));
                    }
                }
                Rule::Plane { nodes, monte_carlo: false }
            }
            Integrator::MonteCarlo { samples, seed } => {
                let mut r = rng::stream(seed, 0xE0);
                let w = 1.0 / samples as f64;
                let nodes = (0..samples)
                    .map(|_| {
                        let a: f64 = StandardNormal.sample(&mut r);
                        let b: f64 = StandardNormal.sample(&mut r);
                        (Complex::new(a, b), w)
                    })
                    .collect();
                Rule::Plane { nodes, monte_carlo: true }
            }
        }
    }
}

/// First and second partial derivatives of `E0(s, ρ)` (bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E0Derivatives {
    pub value: f64,
    pub d_rho: f64,
    pub d_s: f64,
    pub d_rho_rho: f64,
    pub d_s_s: f64,
    pub d_rho_s: f64,
}

/// Reusable evaluator of `E0(s, ρ)` for one channel, metric and noise rule.
#[derive(Debug, Clone)]
pub struct Evaluator {
    sigma2: f64,
    kind: Kind,
    rule: Rule,
}

#[derive(Debug, Clone)]
enum Kind {
    /// BPSK after derotation: the statistic is `a x + z` with `z ~ N(0, σ²)`
    /// and the metric gain projects to `g`.
    Line { a: f64, g: f64 },
    /// Generic complex alphabet.
    Plane { hx: Vec<Complex>, gx: Vec<Complex> },
}

impl Evaluator {
    /// Full complex-plane evaluator, valid for every constellation.
    pub fn full(
        constellation: &Constellation,
        sigma2: f64,
        h: Complex,
        metric: Metric,
        integrator: Integrator,
    ) -> Result<Self> {
        check_sigma2(sigma2)?;
        let g = match metric {
            Metric::Matched => h,
            Metric::Mismatched(e) => e.h_hat,
        };
        let pts = constellation.points();
        Ok(Self {
            sigma2,
            kind: Kind::Plane {
                hx: pts.iter().map(|&x| h * x).collect(),
                gx: pts.iter().map(|&x| g * x).collect(),
            },
            rule: Rule::plane(integrator),
        })
    }

    /// One-dimensional evaluator for matched BPSK with gain amplitude `a`.
    pub fn bpsk_matched(amplitude: f64, sigma2: f64, order: usize) -> Result<Self> {
        check_sigma2(sigma2)?;
        Ok(Self { sigma2, kind: Kind::Line { a: amplitude, g: amplitude }, rule: Rule::line(order) })
    }

    /// Picks the 1-D BPSK evaluator for matched Gauss-Hermite queries and
    /// the full evaluator otherwise.
    pub fn for_query(q: &ExponentQuery) -> Result<Self> {
        match (q.metric, q.integrator) {
            (Metric::Matched, Integrator::GaussHermite { order }) if q.constellation.is_bpsk() => {
                Self::bpsk_matched(q.h.norm(), q.sigma2, order)
            }
            _ => Self::full(&q.constellation, q.sigma2, q.h, q.metric, q.integrator),
        }
    }

    fn is_monte_carlo(&self) -> bool {
        matches!(self.rule, Rule::Plane { monte_carlo: true, .. })
    }

    /// Visits `log E[(q(X',Y)/q(X,Y))^s | X, Y]` style inner terms: for each
    /// noise node, calls `f(node_index, weight, diffs)` once per transmitted
    /// symbol with the metric differences `c(x') - c(x)` in nats.
    fn for_each_term<F: FnMut(usize, f64, &[f64])>(&self, mut f: F) {
        let inv2s = 1.0 / (2.0 * self.sigma2);
        let sd = self.sigma2.sqrt();
        match (&self.kind, &self.rule) {
            (Kind::Line { a, g }, Rule::Line(nodes)) => {
                let mut d = [0.0; 2];
                for (j, &(u, w)) in nodes.iter().enumerate() {
                    // x = +1; the other symbol is symmetric
                    let y = a + sd * u;
                    d[1] = -4.0 * g * y * inv2s;
                    f(j, w, &d);
                }
            }
            (Kind::Plane { hx, gx }, Rule::Plane { nodes, .. }) => {
                let nx = hx.len();
                let inv_nx = 1.0 / nx as f64;
                let mut c = vec![0.0; nx];
                let mut d = vec![0.0; nx];
                let gg: Vec<f64> = gx.iter().map(|g| g.norm_sqr()).collect();
                for (j, &(u, w)) in nodes.iter().enumerate() {
                    let z = u * sd;
                    for (xi, &hxi) in hx.iter().enumerate() {
                        let y = hxi + z;
                        for k in 0..nx {
                            let g = gx[k];
                            c[k] = (2.0 * (y.re * g.re + y.im * g.im) - gg[k]) * inv2s;
                        }
                        let cx = c[xi];
                        for k in 0..nx {
                            d[k] = c[k] - cx;
                        }
                        f(j, w * inv_nx, &d);
                    }
                }
            }
            _ => unreachable!("kernel and rule kinds always match"),
        }
    }

    fn node_count(&self) -> usize {
        match &self.rule {
            Rule::Line(n) => n.len(),
            Rule::Plane { nodes, .. } => nodes.len(),
        }
    }

    /// `E0(s, ρ)` in bits.
    pub fn e0(&self, s: f64, rho: f64) -> E0Estimate {
        if rho == 0.0 {
            return E0Estimate { value: 0.0, std_error: 0.0 };
        }
        let ln_card = match self.kind {
            Kind::Line { .. } => LN_2,
            Kind::Plane { ref hx, .. } => (hx.len() as f64).ln(),
        };
        let mut buf = Vec::with_capacity(16);
        if self.is_monte_carlo() {
            // per-sample values for the standard error
            let n = self.node_count();
            let mut per_node = vec![f64::NEG_INFINITY; n];
            self.for_each_term(|j, w, d| {
                buf.clear();
                buf.extend(d.iter().map(|&v| s * v));
                let l = rho * (log_sum_exp(&buf) - ln_card);
                per_node[j] = crate::special::log_add_exp(per_node[j], l + (w * n as f64).ln());
            });
            let max = per_node.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let vals: Vec<f64> = per_node.iter().map(|l| (l - max).exp()).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se_rel = (var / n as f64).sqrt() / mean;
            E0Estimate { value: -(max + mean.ln()) / LN_2, std_error: se_rel / LN_2 }
        } else {
            let mut acc = LogAccumulator::default();
            self.for_each_term(|_, w, d| {
                buf.clear();
                buf.extend(d.iter().map(|&v| s * v));
                let l = rho * (log_sum_exp(&buf) - ln_card);
                acc.add(l, w);
            });
            E0Estimate { value: -acc.ln() / LN_2, std_error: 0.0 }
        }
    }

    /// `E0(s, ρ)` with its first and second partial derivatives.
    pub fn e0_derivatives(&self, s: f64, rho: f64) -> E0Derivatives {
        let ln_card = match self.kind {
            Kind::Line { .. } => LN_2,
            Kind::Plane { ref hx, .. } => (hx.len() as f64).ln(),
        };
        // F = Σ w exp(ρ ℓ); sums below are F_·/F with a running log shift.
        let mut shift = f64::NEG_INFINITY;
        let mut m = [0.0f64; 6];
        let mut p = Vec::with_capacity(16);
        self.for_each_term(|_, w, d| {
            let max = d.iter().map(|&v| s * v).fold(f64::NEG_INFINITY, f64::max);
            p.clear();
            let mut z = 0.0;
            for &v in d {
                let e = (s * v - max).exp();
                p.push(e);
                z += e;
            }
            let ell = max + z.ln() - ln_card;
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for (e, &v) in p.iter().zip(d) {
                d1 += e * v;
                d2 += e * v * v;
            }
            d1 /= z;
            d2 /= z;
            let var = d2 - d1 * d1;
            let g = rho * ell + w.ln();
            if g > shift {
                let r = (shift - g).exp();
                for v in &mut m {
                    *v *= r;
                }
                shift = g;
            }
            let e = (g - shift).exp();
            m[0] += e;
            m[1] += e * ell;
            m[2] += e * rho * d1;
            m[3] += e * ell * ell;
            m[4] += e * (rho * var + rho * rho * d1 * d1);
            m[5] += e * (d1 + rho * ell * d1);
        });
        let f = m[0];
        let (fr, fs) = (m[1] / f, m[2] / f);
        let (frr, fss, frs) = (m[3] / f, m[4] / f, m[5] / f);
        let k = -1.0 / LN_2;
        E0Derivatives {
            value: k * (shift + f.ln()),
            d_rho: k * fr,
            d_s: k * fs,
            d_rho_rho: k * (frr - fr * fr),
            d_s_s: k * (fss - fs * fs),
            d_rho_s: k * (frs - fr * fs),
        }
    }

    /// `sup_s E0(s, ρ)` by golden-section search on `log s` over
    /// `[1e-3, 1e3]`.
    pub fn sup_over_s(&self, rho: f64) -> Result<(f64, f64)> {
        if rho == 0.0 {
            return Ok((1.0, 0.0));
        }
        let m = golden_max(|ls| self.e0(ls.exp(), rho).value, (1e-3f64).ln(), (1e3f64).ln(), 1e-6, 200)?;
        Ok((m.x.exp(), m.value))
    }
}

#[derive(Default)]
struct LogAccumulator {
    shift: f64,
    sum: f64,
    started: bool,
}

impl LogAccumulator {
    fn add(&mut self, log_value: f64, weight: f64) {
        if !self.started {
            self.shift = log_value;
            self.started = true;
        }
        if log_value > self.shift {
            self.sum *= (self.shift - log_value).exp();
            self.shift = log_value;
        }
        self.sum += weight * (log_value - self.shift).exp();
    }

    fn ln(&self) -> f64 {
        self.shift + self.sum.ln()
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("noise variance must be positive, got {sigma2}")))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")))
    }
}

/// Matched Gallager function `E0(ρ)` in bits (`s = 1/(1+ρ)`).
pub fn e0_matched(
    constellation: &Constellation,
    sigma2: f64,
    h: Complex,
    rho: f64,
    integrator: Integrator,
) -> Result<E0Estimate> {
    check_rho(rho)?;
    let q = ExponentQuery::matched(constellation.clone(), sigma2, 1.0, 1).with_gain(h).with_integrator(integrator);
    Ok(Evaluator::for_query(&q)?.e0(1.0 / (1.0 + rho), rho))
}

/// Mismatched Gallager function `E0(s, ρ, ĥ)` in bits, always evaluated
/// over the complex plane.
pub fn e0_mismatched(
    constellation: &Constellation,
    sigma2: f64,
    h: Complex,
    estimate: ChannelEstimate,
    s: f64,
    rho: f64,
    integrator: Integrator,
) -> Result<E0Estimate> {
    check_rho(rho)?;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let ev = Evaluator::full(constellation, sigma2, h, Metric::Mismatched(estimate), integrator)?;
    Ok(ev.e0(s, rho))
}

/// A random-coding exponent query.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentQuery {
    pub constellation: Constellation,
    pub sigma2: f64,
    pub h: Complex,
    pub metric: Metric,
    /// Code rate in bits per channel symbol.
    pub rate: f64,
    /// Code length in channel symbols.
    pub n: usize,
    pub integrator: Integrator,
    pub optimizer: Optimizer,
    /// Answer mismatched BPSK queries through the phase reduction.
    pub bpsk_reduction: bool,
    /// Also evaluate a coarser rule at the optimum to report quadrature
    /// error.
    pub estimate_error: bool,
}

impl ExponentQuery {
    pub fn matched(constellation: Constellation, sigma2: f64, rate: f64, n: usize) -> Self {
        let integrator = Integrator::default_for(&constellation);
        Self {
            constellation,
            sigma2,
            h: Complex::new(1.0, 0.0),
            metric: Metric::Matched,
            rate,
            n,
            integrator,
            optimizer: Optimizer::GoldenSection,
            bpsk_reduction: true,
            estimate_error: false,
        }
    }

    pub fn mismatched(
        constellation: Constellation,
        sigma2: f64,
        estimate: ChannelEstimate,
        rate: f64,
        n: usize,
    ) -> Self {
        Self { metric: Metric::Mismatched(estimate), ..Self::matched(constellation, sigma2, rate, n) }
    }

    pub fn with_gain(mut self, h: Complex) -> Self {
        self.h = h;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_optimizer(mut self, optimizer: Optimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    /// Disables the BPSK phase reduction so the full evaluator runs.
    pub fn full_evaluator(mut self) -> Self {
        self.bpsk_reduction = false;
        self
    }

    pub fn with_error_estimate(mut self) -> Self {
        self.estimate_error = true;
        self
    }

    fn validate(&self) -> Result<()> {
        check_sigma2(self.sigma2)?;
        if !(self.rate > 0.0) {
            return Err(Error::InvalidParameter(format!("code rate must be positive, got {}", self.rate)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("code length must be at least 1".into()));
        }
        Ok(())
    }
}

/// Optimized exponent and the random-coding bound `2^(-n E_G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentResult {
    pub e0: f64,
    pub rho_star: f64,
    pub s_star: f64,
    pub eg: f64,
    pub p_bar: f64,
    /// `log10` of the bound; finite even where `p_bar` underflows.
    pub log10_p_bar: f64,
    pub quadrature_error: f64,
}

impl ExponentResult {
    fn new(e0: f64, rho_star: f64, s_star: f64, rate: f64, n: usize, quadrature_error: f64) -> Self {
        let eg = (e0 - rho_star * rate).max(0.0);
        let (rho_star, e0) = if eg == 0.0 { (0.0, 0.0) } else { (rho_star, e0) };
        let log10_p_bar = -(n as f64) * eg * 2f64.log10();
        Self { e0, rho_star, s_star, eg, p_bar: 10f64.powf(log10_p_bar).min(1.0), log10_p_bar, quadrature_error }
    }

    fn trivial(n: usize, rate: f64) -> Self {
        Self::new(0.0, 0.0, 1.0, rate, n, 0.0)
    }
}

/// Maximizes `E0 - ρ Rc` over `ρ in [0, 1]` (and `s > 0` when mismatched).
pub fn maximize_exponent(query: &ExponentQuery) -> Result<ExponentResult> {
    query.validate()?;
    if let (Metric::Mismatched(est), true, true) =
        (query.metric, query.constellation.is_bpsk(), query.bpsk_reduction)
    {
        return bpsk_reduced(query, est);
    }
    let ev = Evaluator::for_query(query)?;
    let mut res = match (query.metric, query.optimizer) {
        (Metric::Matched, _) => maximize_matched(&ev, query.rate, query.n)?,
        (Metric::Mismatched(_), Optimizer::GoldenSection) => maximize_golden(&ev, query.rate, query.n)?,
        (Metric::Mismatched(_), Optimizer::Newton) => maximize_newton(&ev, query.rate, query.n, None)?,
    };
    if query.eg_is_positive(&res) {
        res.quadrature_error = quadrature_error(query, &ev, &res)?;
    }
    Ok(res)
}

impl ExponentQuery {
    fn eg_is_positive(&self, r: &ExponentResult) -> bool {
        r.eg > 0.0 && (self.estimate_error || matches!(self.integrator, Integrator::MonteCarlo { .. }))
    }
}

fn quadrature_error(q: &ExponentQuery, ev: &Evaluator, r: &ExponentResult) -> Result<f64> {
    if let Some(coarse) = q.integrator.coarser() {
        let cq = q.clone().with_integrator(coarse);
        let cev = Evaluator::for_query(&cq)?;
        Ok((cev.e0(r.s_star, r.rho_star).value - r.e0).abs())
    } else {
        Ok(ev.e0(r.s_star, r.rho_star).std_error)
    }
}

fn bpsk_reduced(q: &ExponentQuery, est: ChannelEstimate) -> Result<ExponentResult> {
    let theta = bpsk::relative_phase(q.h, est);
    let cos = theta.cos();
    if !bpsk::phase_is_valid(theta) {
        return Ok(ExponentResult::trivial(q.n, q.rate));
    }
    let order = match q.integrator {
        Integrator::GaussHermite { order } => order,
        Integrator::MonteCarlo { .. } => 64,
    };
    let a = q.h.norm() * cos;
    let ev = Evaluator::bpsk_matched(a, q.sigma2, order)?;
    let r = maximize_matched(&ev, q.rate, q.n)?;
    // s = s' a / |ĥ| maps the matched optimum back to the mismatched metric
    let s_star = r.s_star * a / est.amplitude();
    Ok(ExponentResult { s_star, ..r })
}

fn maximize_matched(ev: &Evaluator, rate: f64, n: usize) -> Result<ExponentResult> {
    let m = grid_golden_max(|rho| ev.e0(1.0 / (1.0 + rho), rho).value - rho * rate, 0.0, 1.0, 21, 1e-6, 200)?;
    let e0 = m.value + m.x * rate;
    Ok(ExponentResult::new(e0, m.x, 1.0 / (1.0 + m.x), rate, n, 0.0))
}

fn maximize_golden(ev: &Evaluator, rate: f64, n: usize) -> Result<ExponentResult> {
    let mut err = None;
    let m = grid_golden_max(
        |rho| match ev.sup_over_s(rho) {
            Ok((_, v)) => v - rho * rate,
            Err(e) => {
                err = Some(e);
                f64::NEG_INFINITY
            }
        },
        0.0,
        1.0,
        21,
        1e-6,
        200,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let (s, e0) = ev.sup_over_s(m.x)?;
    Ok(ExponentResult::new(e0, m.x, s, rate, n, 0.0))
}

/// Starting point for [`maximize_newton`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmStart {
    pub rho: f64,
    pub s: f64,
}

const NEWTON_MAX_ITER: usize = 100;

/// Range of `s` searched by [`newton_s`].
const S_RANGE: (f64, f64) = (1e-9, 1e9);

/// `s*(ρ)` by safeguarded Newton; `E0` is concave in `s` for fixed `ρ`.
/// When the estimate is useless `E0` decreases in `s` and the supremum
/// (zero) sits at `s -> 0`; the search then stops at the edge of the range.
fn newton_s(ev: &Evaluator, rho: f64, s0: f64) -> Result<(f64, E0Derivatives)> {
    let mut s = s0.max(1e-6);
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let d = ev.e0_derivatives(s, rho);
        if (s <= S_RANGE.0 && d.d_s <= 0.0) || (s >= S_RANGE.1 && d.d_s >= 0.0) {
            return Ok((s, d));
        }
        if d.d_s > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        let mut next = if d.d_s_s < 0.0 { s - d.d_s / d.d_s_s } else if d.d_s > 0.0 { 2.0 * s } else { 0.5 * s };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * s.max(lo) };
        }
        next = next.clamp(S_RANGE.0, S_RANGE.1);
        if (next - s).abs() <= 1e-10 * s || (hi - lo) <= 1e-12 * s {
            let d = ev.e0_derivatives(next, rho);
            return Ok((next, d));
        }
        s = next;
    }
    Err(Error::NotConverged { what: "Newton search over s", iterations: NEWTON_MAX_ITER })
}

/// Newton maximization over `(ρ, s)`. The outer iteration uses the envelope
/// derivatives of `sup_s E0(s, ρ) - ρ Rc`.
pub fn maximize_newton(ev: &Evaluator, rate: f64, n: usize, warm: Option<WarmStart>) -> Result<ExponentResult> {
    let warm = warm.unwrap_or(WarmStart { rho: 0.5, s: 2.0 / 3.0 });
    let phi = |rho: f64, s0: f64| -> Result<(f64, f64, f64, f64)> {
        let (s, d) = newton_s(ev, rho, s0)?;
        let slope = d.d_rho - rate;
        let curv = d.d_rho_rho - d.d_rho_s * d.d_rho_s / d.d_s_s;
        Ok((s, d.value - rho * rate, slope, curv))
    };
    // boundary ρ = 1
    let (s1, v1, slope1, _) = phi(1.0, warm.s)?;
    if slope1 >= 0.0 {
        return Ok(ExponentResult::new(v1 + rate, 1.0, s1, rate, n, 0.0));
    }
    const RHO_MIN: f64 = 1e-4;
    let (s_min, _, slope_min, _) = phi(RHO_MIN, warm.s)?;
    if slope_min <= 0.0 {
        return Ok(ExponentResult::trivial(n, rate));
    }
    let (mut lo, mut hi) = (RHO_MIN, 1.0);
    let mut rho = warm.rho.clamp(lo, hi);
    let mut s = if rho > 0.5 { s1 } else { s_min };
    for _ in 0..NEWTON_MAX_ITER {
        let (s_new, value, slope, curv) = phi(rho, s)?;
        s = s_new;
        if slope > 0.0 {
            lo = rho;
        } else {
            hi = rho;
        }
        let mut next = if curv < 0.0 { rho - slope / curv } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - rho).abs() < 1e-9 || hi - lo < 1e-9 {
            return Ok(ExponentResult::new(value + rho * rate, rho, s, rate, n, 0.0));
        }
        rho = next;
    }
    Err(Error::NotConverged { what: "Newton search over rho", iterations: NEWTON_MAX_ITER })
}

/// Random-coding bound `min(1, 2^(-n E_G))`.
pub fn grcb(query: &ExponentQuery) -> Result<f64> {
    Ok(maximize_exponent(query)?.p_bar)
}
