//! Semi-discrete refractor design.
//!
//! A refractor for targets `m_1..m_N` with radii `b_1..b_N` is the envelope
//! `ρ(x) = min_i h_i(x)` of uniformly refracting surfaces, with
//! `h_i(x) = b_i / (1 − x·p₂(m_i))` in Case I and `b_i / (x·p₂(m_i) − 1)` in
//! Case II. Each source direction is sent to the target whose surface attains
//! the minimum. Design fixes `b_1` and lowers the other radii coordinate by
//! coordinate until every target receives its prescribed energy.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{HouseholderFrame, Vector};
use crate::norms::{MediumPair, Norm, Regime};
use crate::par::{self, pairwise_sum};
use crate::quadrature::{SourceDensity, SphericalCap};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;
const BALANCE_TOL: f64 = 1e-12;
const ADMISSIBLE_TOL: f64 = 1e-12;
const GRAZING_WARN: f64 = 1e-6;
const INIT_EPS: f64 = 1e-6;
const LOWER_FACTOR: f64 = 1e-6;
const BISECTION_STEPS: usize = 200;

/// Target directions `m_i ∈ Σ₂` with positive masses `g_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetMeasure<const D: usize> {
    directions: Vec<Vector<D>>,
    masses: Vec<f64>,
}

impl<const D: usize> TargetMeasure<D> {
    pub fn new(n2: &Norm<D>, directions: Vec<Vector<D>>, masses: Vec<f64>) -> Result<Self> {
        if directions.is_empty() || directions.len() != masses.len() {
            return Err(Error::invalid("targets need one positive mass per direction"));
        }
        for (i, (m, &g)) in directions.iter().zip(&masses).enumerate() {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid(alloc::format!("mass of target {i} is not positive")));
            }
            if !m.is_finite() || (n2.eval(m) - 1.0).abs() > UNIT_TOL {
                return Err(Error::invalid(alloc::format!(
                    "target {i} is not on the unit sphere of N2"
                )));
            }
            for (k, other) in directions[..i].iter().enumerate() {
                if (*m - *other).max_abs() <= 1e-12 {
                    return Err(Error::invalid(alloc::format!("targets {k} and {i} coincide")));
                }
            }
        }
        Ok(Self { directions, masses })
    }

    pub fn directions(&self) -> &[Vector<D>] {
        &self.directions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.masses)
    }

    /// Masses scaled so that they sum to `total`.
    pub fn rescaled(&self, total: f64) -> Self {
        let s = total / self.total();
        Self {
            directions: self.directions.clone(),
            masses: self.masses.iter().map(|g| g * s).collect(),
        }
    }

    /// Same directions, new masses.
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != self.len() || masses.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("targets need one positive mass per direction"));
        }
        Ok(Self {
            directions: self.directions.clone(),
            masses,
        })
    }
}

/// Envelope of uniformly refracting surfaces.
///
/// Radii are stored as base values times a common scale, so that a dilation
/// only touches the scale and the refractor map is exactly unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct Refractor<const D: usize> {
    target: TargetMeasure<D>,
    base: Vec<f64>,
    scale: f64,
    regime: Regime,
    p2m: Vec<Vector<D>>,
}

/// Energy received by each target under a refractor.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport {
    /// `M_i`.
    pub masses: Vec<f64>,
    /// `max_i |M_i − g_i| / Σ w_j`.
    pub residual: f64,
    /// Index of the first minimizing surface per node, `None` if no surface
    /// is defined there.
    pub assignment: Vec<Option<usize>>,
    /// Number of nodes whose minimum is attained by more than one surface.
    pub tied_nodes: usize,
}

impl<const D: usize> Refractor<D> {
    pub fn new(pair: &MediumPair<D>, target: TargetMeasure<D>, radii: Vec<f64>) -> Result<Self> {
        if radii.len() != target.len() || radii.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(Error::invalid("refractor needs one positive radius per target"));
        }
        let p2m = target
            .directions
            .iter()
            .map(|m| pair.n2().gradient(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            target,
            base: radii,
            scale: 1.0,
            regime: pair.regime(),
            p2m,
        })
    }

    pub fn target(&self) -> &TargetMeasure<D> {
        &self.target
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `b_i`.
    pub fn radii(&self) -> Vec<f64> {
        self.base.iter().map(|b| b * self.scale).collect()
    }

    /// Cached `p₂(m_i)`.
    pub fn p2m(&self) -> &[Vector<D>] {
        &self.p2m
    }

    /// Denominator of `h_i` at `x`; nonpositive values mark `x` outside the
    /// surface's domain.
    fn denominator(&self, x: &Vector<D>, i: usize) -> f64 {
        denominator(self.regime, x, &self.p2m[i])
    }

    /// `h_i(x)` for the unscaled radii; `+∞` off the domain.
    fn base_h(&self, x: &Vector<D>, i: usize) -> f64 {
        let d = self.denominator(x, i);
        if d > 0.0 {
            self.base[i] / d
        } else {
            f64::INFINITY
        }
    }

    /// `ρ(x) = min_i h_i(x)`.
    pub fn radius(&self, x: &Vector<D>) -> f64 {
        let h = (0..self.base.len())
            .map(|i| self.base_h(x, i))
            .fold(f64::INFINITY, f64::min);
        h * self.scale
    }

    /// Targets whose surfaces attain the minimum at `x`, within `1e-12`
    /// relative. Empty when no surface is defined at `x`.
    pub fn map(&self, x: &Vector<D>) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_tie(x, |i, _| out.push(i));
        out
    }

    fn for_each_tie(&self, x: &Vector<D>, mut f: impl FnMut(usize, usize)) {
        let n = self.base.len();
        let mut hmin = f64::INFINITY;
        let mut h = [0.0; 64];
        let mut spill = Vec::new();
        let hs: &mut [f64] = if n <= 64 {
            &mut h[..n]
        } else {
            spill.resize(n, 0.0);
            &mut spill
        };
        for (i, slot) in hs.iter_mut().enumerate() {
            *slot = self.base_h(x, i);
            hmin = hmin.min(*slot);
        }
        if !hmin.is_finite() {
            return;
        }
        let cut = hmin * (1.0 + TIE_TOL);
        let count = hs.iter().filter(|&&v| v <= cut).count();
        for (i, &v) in hs.iter().enumerate() {
            if v <= cut {
                f(i, count);
            }
        }
    }

    /// Energy each target receives from `src`; tied nodes are split equally.
    pub fn measure(&self, src: &SourceDensity<D>) -> MeasureReport {
        let n = self.base.len();
        let nodes = src.nodes();
        let w = src.weights();
        // the extra slot counts tied nodes
        let masses = par::accumulate(nodes.len(), n + 1, |j, acc| {
            let mut ties = 0;
            self.for_each_tie(&nodes[j], |i, count| {
                acc[i] += w[j] / count as f64;
                ties = count;
            });
            if ties > 1 {
                acc[n] += 1.0;
            }
        });
        let assignment = par::map(nodes.len(), |j| {
            let mut first = None;
            self.for_each_tie(&nodes[j], |i, _| {
                if first.is_none() {
                    first = Some(i);
                }
            });
            first
        });
        let tied_nodes = masses[n] as usize;
        let masses = masses[..n].to_vec();
        let residual = residual(&masses, self.target.masses(), src.total());
        MeasureReport {
            masses,
            residual,
            assignment,
            tied_nodes,
        }
    }

    /// All radii multiplied by `c > 0`.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("dilation factor must be positive"));
        }
        Ok(Self {
            scale: self.scale * c,
            ..self.clone()
        })
    }

    /// Dilation passing through `r0·x0`.
    pub fn through_point(&self, x0: &Vector<D>, r0: f64) -> Result<Self> {
        let rho = self.radius(x0);
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::OutOfDomain);
        }
        self.dilate(r0 / rho)
    }
}

fn denominator<const D: usize>(regime: Regime, x: &Vector<D>, p2m: &Vector<D>) -> f64 {
    let t = x.dot(p2m);
    match regime {
        Regime::CaseI => 1.0 - t,
        Regime::CaseII => t - 1.0,
    }
}

fn residual(masses: &[f64], goal: &[f64], total: f64) -> f64 {
    masses
        .iter()
        .zip(goal)
        .map(|(m, g)| (m - g).abs())
        .fold(0.0, f64::max)
        / total
}

/// Controls for [`solve_discrete`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Stop once `max_i |M_i − g_i| ≤ tol · Σ w_j`.
    pub tol: f64,
    /// Maximum number of round-robin sweeps.
    pub max_sweeps: usize,
    /// Starting radii (`b_1` is overwritten by the fixed value). `None` uses
    /// radii large enough that the first surface alone forms the envelope.
    pub initial_radii: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_sweeps: 10_000,
            initial_radii: None,
        }
    }
}

/// Result of a design run.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<const D: usize> {
    pub refractor: Refractor<D>,
    pub report: MeasureReport,
    pub sweeps: usize,
    /// Residual after initialization and after every sweep.
    pub residual_history: Vec<f64>,
    /// `(node, target)` pairs on the boundary `x·p₂(m) = 1` of a Case II
    /// domain; they are excluded from that target.
    pub boundary_arcs: Vec<(usize, usize)>,
}

/// Designs a refractor in the pair's regime.
pub fn solve<const D: usize>(
    pair: &MediumPair<D>,
    src: &SourceDensity<D>,
    tgt: &TargetMeasure<D>,
    b1: f64,
    opts: &SolveOptions,
) -> Result<Solution<D>> {
    match pair.regime() {
        Regime::CaseI => solve_discrete(pair, src, tgt, b1, opts),
        Regime::CaseII => solve_discrete_case_ii(pair, src, tgt, b1, opts),
    }
}

/// Case I design with `b_1` fixed.
pub fn solve_discrete<const D: usize>(
    pair: &MediumPair<D>,
    src: &SourceDensity<D>,
    tgt: &TargetMeasure<D>,
    b1: f64,
    opts: &SolveOptions,
) -> Result<Solution<D>> {
    if pair.regime() != Regime::CaseI {
        return Err(Error::invalid("solve_discrete needs a Case I pair"));
    }
    check_common(src, tgt, b1, opts)?;
    // admissibility: m_i·p₁(x_j) ≥ 1
    let p1: Vec<Vector<D>> = src
        .nodes()
        .iter()
        .map(|x| pair.n1().gradient(x))
        .collect::<Result<_>>()?;
    let mut worst = f64::INFINITY;
    for (j, p) in p1.iter().enumerate() {
        for (i, m) in tgt.directions().iter().enumerate() {
            let v = m.dot(p);
            if v < 1.0 - ADMISSIBLE_TOL {
                return Err(Error::InfeasibleTarget {
                    node: j,
                    target: i,
                    value: v,
                });
            }
            worst = worst.min(v);
        }
    }
    if worst < 1.0 + GRAZING_WARN {
        log::warn!("targets are nearly grazing: min m.p1(x) = {worst}");
    }
    let kappa = pair.kappa();
    let init = b1 * (1.0 + kappa) / (1.0 - kappa) * (1.0 + INIT_EPS);
    let lower = b1 * (1.0 - kappa) / (1.0 + kappa) * LOWER_FACTOR;
    let problem = Problem::new(pair, src, tgt, Vec::new())?;
    problem.run(pair, b1, init, lower, opts)
}

/// Case II design with `b_1` fixed.
pub fn solve_discrete_case_ii<const D: usize>(
    pair: &MediumPair<D>,
    src: &SourceDensity<D>,
    tgt: &TargetMeasure<D>,
    b1: f64,
    opts: &SolveOptions,
) -> Result<Solution<D>> {
    if pair.regime() != Regime::CaseII {
        return Err(Error::invalid("solve_discrete_case_ii needs a Case II pair"));
    }
    check_common(src, tgt, b1, opts)?;
    let n = tgt.len();
    let p2m: Vec<Vector<D>> = tgt
        .directions()
        .iter()
        .map(|m| pair.n2().gradient(m))
        .collect::<Result<_>>()?;
    let mut boundary = Vec::new();
    for (j, x) in src.nodes().iter().enumerate() {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, p) in p2m.iter().enumerate() {
            let v = x.dot(p);
            if (v - 1.0).abs() <= ADMISSIBLE_TOL {
                boundary.push((j, i));
            }
            if v > best.1 {
                best = (i, v);
            }
        }
        if best.1 <= 1.0 + ADMISSIBLE_TOL {
            return Err(Error::InfeasibleTarget {
                node: j,
                target: best.0,
                value: best.1,
            });
        }
    }
    let problem = Problem::new(pair, src, tgt, boundary.clone())?;
    // radii large enough that h_1 is the envelope wherever it is defined
    let (mut d1_min, mut d1_max) = (f64::INFINITY, 0.0f64);
    let mut di_max = 0.0f64;
    let mut di_min = f64::INFINITY;
    for j in 0..src.len() {
        let d1 = problem.den[j * n];
        if d1 > 0.0 {
            d1_min = d1_min.min(d1);
            d1_max = d1_max.max(d1);
        }
        for i in 1..n {
            let d = problem.den[j * n + i];
            if d > 0.0 {
                di_max = di_max.max(d);
                di_min = di_min.min(d);
            }
        }
    }
    if !d1_min.is_finite() {
        return Err(Error::InfeasibleTarget {
            node: 0,
            target: 0,
            value: 1.0,
        });
    }
    let (init, lower) = if n > 1 && di_min.is_finite() {
        (
            b1 * di_max / d1_min * (1.0 + INIT_EPS),
            b1 * di_min / d1_max * LOWER_FACTOR,
        )
    } else {
        (b1, b1)
    };
    problem.run(pair, b1, init, lower, opts)
}

fn check_common<const D: usize>(
    src: &SourceDensity<D>,
    tgt: &TargetMeasure<D>,
    b1: f64,
    opts: &SolveOptions,
) -> Result<()> {
    if !(b1 > 0.0 && b1.is_finite()) {
        return Err(Error::invalid("b1 must be positive"));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (s, g) = (src.total(), tgt.total());
    if (s - g).abs() > BALANCE_TOL * s {
        return Err(Error::invalid(alloc::format!(
            "target masses sum to {g} but the source carries {s}"
        )));
    }
    let heaviest = src.weights().iter().copied().fold(0.0, f64::max);
    if heaviest > opts.tol * s {
        log::warn!(
            "tolerance {} is below the heaviest node ({} of the total); the residual may not reach it",
            opts.tol,
            heaviest / s
        );
    }
    if let Some(init) = &opts.initial_radii {
        if init.len() != tgt.len() || init.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(Error::invalid("initial radii must be positive, one per target"));
        }
    }
    Ok(())
}

/// Precomputed denominators `den[j·N + i]` of `h_i(x_j)`; nonpositive entries
/// are arcs outside the surface's domain.
struct Problem<'a, const D: usize> {
    src: &'a SourceDensity<D>,
    tgt: &'a TargetMeasure<D>,
    den: Vec<f64>,
    boundary: Vec<(usize, usize)>,
}

impl<'a, const D: usize> Problem<'a, D> {
    fn new(
        pair: &MediumPair<D>,
        src: &'a SourceDensity<D>,
        tgt: &'a TargetMeasure<D>,
        boundary: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = tgt.len();
        let p2m: Vec<Vector<D>> = tgt
            .directions()
            .iter()
            .map(|m| pair.n2().gradient(m))
            .collect::<Result<_>>()?;
        let regime = pair.regime();
        let nodes = src.nodes();
        let rows = par::map(nodes.len(), |j| {
            let mut row = vec![0.0; n];
            for (i, p) in p2m.iter().enumerate() {
                let d = denominator(regime, &nodes[j], p);
                row[i] = if d > ADMISSIBLE_TOL || regime == Regime::CaseI {
                    d
                } else {
                    0.0
                };
            }
            row
        });
        let den = rows.into_iter().flatten().collect();
        Ok(Self {
            src,
            tgt,
            den,
            boundary,
        })
    }

    fn n(&self) -> usize {
        self.tgt.len()
    }

    /// Measure with ties split equally.
    fn masses(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let w = self.src.weights();
        par::accumulate(self.src.len(), n, |j, acc| {
            let row = &self.den[j * n..(j + 1) * n];
            let mut hmin = f64::INFINITY;
            for i in 0..n {
                if row[i] > 0.0 {
                    hmin = hmin.min(b[i] / row[i]);
                }
            }
            if !hmin.is_finite() {
                return;
            }
            let cut = hmin * (1.0 + TIE_TOL);
            let tied = |i: usize| row[i] > 0.0 && b[i] / row[i] <= cut;
            let count = (0..n).filter(|&i| tied(i)).count();
            let share = w[j] / count as f64;
            for (i, a) in acc.iter_mut().enumerate() {
                if tied(i) {
                    *a += share;
                }
            }
        })
    }

    /// `min_{k≠i} h_k(x_j)` for every node.
    fn envelope(&self, b: &[f64], i: usize) -> Vec<f64> {
        let n = self.n();
        par::map(self.src.len(), |j| {
            let row = &self.den[j * n..(j + 1) * n];
            let mut e = f64::INFINITY;
            for k in 0..n {
                if k != i && row[k] > 0.0 {
                    e = e.min(b[k] / row[k]);
                }
            }
            e
        })
    }

    /// Mass captured by target `i` at radius `bi` against a fixed envelope.
    fn captured(&self, i: usize, bi: f64, env: &[f64]) -> f64 {
        let n = self.n();
        let w = self.src.weights();
        par::accumulate(self.src.len(), 1, |j, acc| {
            let d = self.den[j * n + i];
            if d > 0.0 && bi / d < env[j] {
                acc[0] += w[j];
            }
        })[0]
    }

    /// Moves `b_i` so that target `i` captures a mass in `[lo, hi]`, by
    /// bisection on `log b_i`. Returns the new radius.
    fn adjust(&self, b: &[f64], i: usize, lo: f64, hi: f64, lower: f64, upper: f64) -> f64 {
        let env = self.envelope(b, i);
        let mass = |bi: f64| self.captured(i, bi, &env);
        let current = mass(b[i]);
        // small radius captures more
        let (mut small, mut large) = if current < lo {
            let mut s = lower.min(b[i]);
            let mut k = 0;
            while mass(s) < lo && k < 60 {
                s *= 1e-3;
                k += 1;
            }
            (s, b[i])
        } else if current > hi {
            let mut l = upper.max(b[i]);
            let mut k = 0;
            while mass(l) > hi && k < 60 {
                l *= 1e3;
                k += 1;
            }
            (b[i], l)
        } else {
            return b[i];
        };
        for _ in 0..BISECTION_STEPS {
            let mid = libm::sqrt(small) * libm::sqrt(large);
            if !(mid > small && mid < large) {
                break;
            }
            let m = mass(mid);
            if m > hi {
                small = mid;
            } else if m < lo {
                large = mid;
            } else {
                return mid;
            }
        }
        // the band falls inside one jump of the step function
        if current < lo {
            small
        } else {
            large
        }
    }

    fn run(
        &self,
        pair: &MediumPair<D>,
        b1: f64,
        init: f64,
        lower: f64,
        opts: &SolveOptions,
    ) -> Result<Solution<D>> {
        let n = self.n();
        let total = self.src.total();
        let g = self.tgt.masses();
        let mut b = match &opts.initial_radii {
            Some(r) => r.clone(),
            None => vec![init; n],
        };
        b[0] = b1;
        let upper = init.max(b.iter().copied().fold(0.0, f64::max));
        let delta = if n > 1 {
            opts.tol * total / (n - 1) as f64
        } else {
            opts.tol * total
        };
        let mut masses = self.masses(&b);
        let mut history = vec![residual(&masses, g, total)];
        let mut sweeps = 0;
        while history[history.len() - 1] > opts.tol {
            if sweeps >= opts.max_sweeps {
                return Err(Error::NonConvergence {
                    sweeps,
                    residual: history[history.len() - 1],
                });
            }
            sweeps += 1;
            let mut moved = false;
            for i in 1..n {
                if masses[i] >= g[i] - delta && masses[i] <= g[i] {
                    continue;
                }
                let bi = self.adjust(&b, i, g[i] - 0.5 * delta, g[i], lower, upper);
                if bi != b[i] {
                    b[i] = bi;
                    moved = true;
                    masses = self.masses(&b);
                }
            }
            let r = residual(&masses, g, total);
            log::debug!("sweep {sweeps}: residual {r:e}");
            history.push(r);
            if !moved && r > opts.tol {
                return Err(Error::NonConvergence { sweeps, residual: r });
            }
        }
        let refractor = Refractor::new(pair, self.tgt.clone(), b)?;
        let report = refractor.measure(self.src);
        Ok(Solution {
            refractor,
            report,
            sweeps,
            residual_history: history,
            boundary_arcs: self.boundary.clone(),
        })
    }
}

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Discretizes a continuous target density on a cap of directions into
/// `count` weighted directions on `Σ₂` with total mass `total`.
///
/// The cap is flattened by the azimuthal equal-area chart and cut into rings
/// of equal-area cells. Each cell's mass is a Gauss–Legendre integral of
/// `density` (per unit solid angle of the Euclidean direction), and its
/// direction is the chart centroid mapped back and normalized to `Σ₂`.
/// Cells with no mass are dropped.
pub fn approximate_measure<F>(
    n2: &Norm<3>,
    cap: &SphericalCap,
    density: F,
    count: usize,
    total: f64,
) -> Result<TargetMeasure<3>>
where
    F: Fn(&Vector<3>) -> f64,
{
    if count == 0 {
        return Err(Error::invalid("need at least one target"));
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::invalid("total mass must be positive"));
    }
    let frame = HouseholderFrame::new(&cap.axis());
    let mut t = frame.tangents();
    let e1 = t.next().unwrap_or_default();
    let e2 = t.next().unwrap_or_default();
    let e3 = cap.axis();
    let rc = 2.0 * libm::sin(0.5 * cap.angle());
    let to_sphere = |u: f64, v: f64| {
        // inverse azimuthal equal-area projection
        let r2 = u * u + v * v;
        let k = libm::sqrt((1.0 - 0.25 * r2).max(0.0));
        e1 * (u * k) + e2 * (v * k) + e3 * (1.0 - 0.5 * r2)
    };

    let counts = ring_counts(count);
    let mut cum = 0usize;
    let mut dirs = Vec::with_capacity(count);
    let mut masses = Vec::with_capacity(count);
    let tau = 2.0 * core::f64::consts::PI;
    for &cells in &counts {
        let q0 = cum as f64 / count as f64 * rc * rc;
        cum += cells;
        let q1 = cum as f64 / count as f64 * rc * rc;
        for c in 0..cells {
            let f0 = tau * c as f64 / cells as f64;
            let f1 = tau * (c + 1) as f64 / cells as f64;
            // composite rule in φ, panels no wider than π/4
            let panels = libm::ceil((f1 - f0) / core::f64::consts::FRAC_PI_4 - 1e-9).max(1.0) as usize;
            let (mut mass, mut mu, mut mv) = (0.0, 0.0, 0.0);
            for (a, wa) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                let q = 0.5 * (q0 + q1) + 0.5 * (q1 - q0) * a;
                let r = libm::sqrt(q);
                for panel in 0..panels {
                    let g0 = f0 + (f1 - f0) * panel as f64 / panels as f64;
                    let g1 = f0 + (f1 - f0) * (panel + 1) as f64 / panels as f64;
                    for (bq, wb) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                        let f = 0.5 * (g0 + g1) + 0.5 * (g1 - g0) * bq;
                        let (u, v) = (r * libm::cos(f), r * libm::sin(f));
                        let dens = density(&to_sphere(u, v));
                        if !(dens >= 0.0 && dens.is_finite()) {
                            return Err(Error::invalid("density must be finite and nonnegative"));
                        }
                        // dA = ½ d(r²) dφ
                        let da = wa * wb * 0.25 * (q1 - q0) * 0.5 * (g1 - g0);
                        mass += dens * da;
                        mu += dens * da * u;
                        mv += dens * da * v;
                    }
                }
            }
            if mass > 0.0 {
                let y = to_sphere(mu / mass, mv / mass).normalized();
                dirs.push(y / n2.eval(&y));
                masses.push(mass);
            }
        }
    }
    debug_assert_eq!(cum, count);
    if masses.is_empty() {
        return Err(Error::invalid("density has no mass on the cap"));
    }
    let raw = pairwise_sum(&masses);
    let masses = masses.iter().map(|m| m * total / raw).collect();
    TargetMeasure::new(n2, dirs, masses)
}

/// Cells per ring of an equal-area polar partition: `R = round(√(N/π))`
/// rings, ring `i` getting a share proportional to `2i + 1` by largest
/// remainders, with at least one cell each.
fn ring_counts(n: usize) -> Vec<usize> {
    let rings = (libm::round(libm::sqrt(n as f64 / core::f64::consts::PI)) as usize).max(1);
    let rr = (rings * rings) as f64;
    let ideal: Vec<f64> = (0..rings)
        .map(|i| (2 * i + 1) as f64 / rr * n as f64)
        .collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| (*x as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    while assigned > n {
        // take from the ring with the most surplus that can spare a cell
        let k = (0..rings)
            .filter(|&i| counts[i] > 1)
            .max_by(|&a, &b| {
                (counts[a] as f64 - ideal[a]).total_cmp(&(counts[b] as f64 - ideal[b]))
            })
            .unwrap_or(rings - 1);
        counts[k] -= 1;
        assigned -= 1;
    }
    let mut order: Vec<usize> = (0..rings).collect();
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - counts[a] as f64;
        let rb = ideal[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut k = 0;
    while assigned < n {
        counts[order[k % rings]] += 1;
        assigned += 1;
        k += 1;
    }
    counts
}
