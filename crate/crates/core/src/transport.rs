//! Discrete optimal transport cross-check of refractor designs.
//!
//! With `c(x, m) = log(1/(1 − x·p₂(m)))` (Case I) a refractor satisfies
//! `log ρ(x) = min_i (log b_i + c(x, m_i))`, so its map is the optimal plan
//! that minimizes total cost between the source and the energy it delivers.
//! In Case II the cost is `c(x, m) = log(x·p₂(m) − 1)`, `log ρ = min_i (log b_i
//! − c)`, and the optimal plan maximizes total cost. Arcs outside a Case II
//! domain are excluded.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Vector;
use crate::norms::{MediumPair, Regime};
use crate::par::{self, pairwise_sum};
use crate::quadrature::SourceDensity;
use crate::solver::{Refractor, TargetMeasure};
use crate::{Error, Result};

const CONCAVITY_TOL: f64 = 1e-9;
const BALANCE_TOL: f64 = 1e-9;

/// Dense cost matrix, rows are source nodes and columns targets.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    regime: Regime,
}

impl CostMatrix {
    /// Builds a matrix from row-major entries. Excluded arcs are `−∞`.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>, regime: Regime) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::invalid("cost matrix shape mismatch"));
        }
        if entries.iter().any(|c| c.is_nan() || *c == f64::INFINITY) {
            return Err(Error::invalid("cost entries must be finite or -inf"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
            regime,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `c(x_j, m_i)`; `−∞` marks an excluded arc.
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.entries[j * self.cols + i]
    }

    /// Whether optimal plans maximize (Case II) rather than minimize (Case I).
    pub fn maximizes(&self) -> bool {
        self.regime == Regime::CaseII
    }

    /// Cost oriented for minimization, `+∞` on excluded arcs: the shift with
    /// `log ρ(x) = min_i (log b_i + k(x, m_i))`.
    pub fn min_plus(&self, j: usize, i: usize) -> f64 {
        let c = self.get(j, i);
        if c == f64::NEG_INFINITY {
            f64::INFINITY
        } else if self.maximizes() {
            -c
        } else {
            c
        }
    }
}

/// Cost of every (node, target) pair.
pub fn build_cost<const D: usize>(
    pair: &MediumPair<D>,
    src: &SourceDensity<D>,
    tgt: &TargetMeasure<D>,
) -> Result<CostMatrix> {
    let p2m: Vec<Vector<D>> = tgt
        .directions()
        .iter()
        .map(|m| pair.n2().gradient(m))
        .collect::<Result<_>>()?;
    let regime = pair.regime();
    let nodes = src.nodes();
    let cols = p2m.len();
    let rows = par::map(nodes.len(), |j| {
        p2m.iter()
            .map(|p| {
                let t = nodes[j].dot(p);
                match regime {
                    Regime::CaseI => -libm::log(1.0 - t),
                    Regime::CaseII if t > 1.0 => libm::log(t - 1.0),
                    Regime::CaseII => f64::NEG_INFINITY,
                }
            })
            .collect::<Vec<f64>>()
    });
    CostMatrix::from_entries(nodes.len(), cols, rows.into_iter().flatten().collect(), regime)
}

/// Basic arcs of an optimal plan.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    /// `(node, target, mass)` with positive mass.
    pub arcs: Vec<(usize, usize, f64)>,
    /// `Σ plan·c` in the matrix's own convention.
    pub objective: f64,
    pub pivots: usize,
}

impl TransportPlan {
    /// Target receiving the largest share of each node (lowest index on ties).
    pub fn assignment(&self) -> Vec<Option<usize>> {
        let mut best: Vec<Option<(usize, f64)>> = vec![None; self.rows];
        for &(j, i, f) in &self.arcs {
            match best[j] {
                Some((bi, bf)) if bf > f || (bf == f && bi < i) => {}
                _ => best[j] = Some((i, f)),
            }
        }
        best.into_iter().map(|b| b.map(|(i, _)| i)).collect()
    }

    /// Mass received by each target.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut parts = vec![Vec::new(); self.cols];
        for &(_, i, f) in &self.arcs {
            parts[i].push(f);
        }
        parts.iter().map(|p| pairwise_sum(p)).collect()
    }
}

/// Exact transportation simplex.
///
/// Starts from the north-west corner rule, prices with MODI potentials, enters
/// the most negative reduced cost (lowest index among the most negative after
/// a run of degenerate pivots) and pivots around the tree cycle. Excluded
/// arcs carry a big-M cost; positive flow on one means the instance is
/// infeasible.
pub fn solve_ot_exact(cost: &CostMatrix, supply: &[f64], demand: &[f64]) -> Result<TransportPlan> {
    let (m, n) = (cost.rows, cost.cols);
    if supply.len() != m || demand.len() != n {
        return Err(Error::invalid("marginals do not match the cost matrix"));
    }
    if supply.iter().chain(demand).any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::invalid("marginals must be finite and nonnegative"));
    }
    let (ts, td) = (pairwise_sum(supply), pairwise_sum(demand));
    if (ts - td).abs() > BALANCE_TOL * ts.max(td) {
        return Err(Error::invalid("supply and demand totals differ"));
    }
    let finite_max = (0..m * n)
        .map(|e| cost.min_plus(e / n, e % n))
        .filter(|c| c.is_finite())
        .fold(0.0f64, |a, c| a.max(c.abs()));
    let big_m = 1e6 * (1.0 + finite_max);
    let k = |j: usize, i: usize| {
        let c = cost.min_plus(j, i);
        if c.is_finite() {
            c
        } else {
            big_m
        }
    };
    let mut simplex = Simplex::north_west(m, n, supply, demand);
    let eps = 1e-12 * (1.0 + finite_max);
    let mut degenerate_run = 0usize;
    let mut pivots = 0usize;
    loop {
        simplex.build_tree();
        let (u, v) = simplex.potentials(&k);
        let bland = degenerate_run > m + n;
        let entering = best_entering(m, n, &k, &u, &v, &simplex.is_basic, eps, bland);
        let Some((j, i)) = entering else { break };
        let theta = simplex.pivot(j, i);
        pivots += 1;
        if theta == 0.0 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        if pivots > 50 * (m + n) * n.max(1) + 10_000 {
            return Err(Error::ConvergenceFailure { iterations: pivots });
        }
    }
    let scale = ts.max(td);
    let mut arcs = Vec::new();
    let mut terms = Vec::new();
    for b in &simplex.basis {
        if b.flow > 0.0 {
            if !cost.min_plus(b.row, b.col).is_finite() {
                if b.flow > 1e-12 * scale {
                    return Err(Error::Infeasible);
                }
                continue;
            }
            arcs.push((b.row, b.col, b.flow));
        }
    }
    arcs.sort_by_key(|a| (a.0, a.1));
    for &(j, i, f) in &arcs {
        terms.push(f * cost.get(j, i));
    }
    Ok(TransportPlan {
        rows: m,
        cols: n,
        arcs,
        objective: pairwise_sum(&terms),
        pivots,
    })
}

#[allow(clippy::too_many_arguments)]
fn best_entering<K: Fn(usize, usize) -> f64 + Sync>(
    m: usize,
    n: usize,
    k: &K,
    u: &[f64],
    v: &[f64],
    basic: &[bool],
    eps: f64,
    bland: bool,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for j in 0..m {
        for i in 0..n {
            if basic[j * n + i] {
                continue;
            }
            let r = k(j, i) - u[j] - v[i];
            if r < -eps {
                if bland {
                    return Some((j, i));
                }
                if best.is_none_or(|b| r < b.2) {
                    best = Some((j, i, r));
                }
            }
        }
    }
    best.map(|b| (b.0, b.1))
}

#[derive(Clone, Copy, Debug)]
struct BasicArc {
    row: usize,
    col: usize,
    flow: f64,
}

/// Spanning tree of basic arcs over `m` row vertices and `n` column vertices
/// (`m + j` for column `j`).
struct Simplex {
    m: usize,
    n: usize,
    basis: Vec<BasicArc>,
    is_basic: Vec<bool>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Simplex {
    fn north_west(m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Self {
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut j, mut i) = (0, 0);
        loop {
            let last = j == m - 1 && i == n - 1;
            let f = if last { s[j].max(0.0) } else { s[j].min(d[i]) };
            basis.push(BasicArc {
                row: j,
                col: i,
                flow: f,
            });
            s[j] -= f;
            d[i] -= f;
            if last {
                break;
            }
            if j == m - 1 {
                i += 1;
            } else if i == n - 1 || s[j] < d[i] {
                j += 1;
            } else {
                i += 1;
            }
        }
        let mut is_basic = vec![false; m * n];
        for b in &basis {
            is_basic[b.row * n + b.col] = true;
        }
        Self {
            m,
            n,
            basis,
            is_basic,
            parent: vec![NONE; m + n],
            parent_arc: vec![NONE; m + n],
            depth: vec![0; m + n],
            order: Vec::with_capacity(m + n),
        }
    }

    fn build_tree(&mut self) {
        let total = self.m + self.n;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
        for (a, b) in self.basis.iter().enumerate() {
            adj[b.row].push(a);
            adj[self.m + b.col].push(a);
        }
        self.parent.fill(NONE);
        self.parent_arc.fill(NONE);
        self.order.clear();
        let mut seen = vec![false; total];
        seen[0] = true;
        self.depth[0] = 0;
        self.order.push(0);
        let mut head = 0;
        while head < self.order.len() {
            let x = self.order[head];
            head += 1;
            for &a in &adj[x] {
                let b = self.basis[a];
                let y = if x < self.m { self.m + b.col } else { b.row };
                if !seen[y] {
                    seen[y] = true;
                    self.parent[y] = x;
                    self.parent_arc[y] = a;
                    self.depth[y] = self.depth[x] + 1;
                    self.order.push(y);
                }
            }
        }
        debug_assert_eq!(self.order.len(), total);
    }

    fn potentials<K: Fn(usize, usize) -> f64>(&self, k: &K) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![0.0; self.m + self.n];
        for &y in &self.order[1..] {
            let x = self.parent[y];
            let b = self.basis[self.parent_arc[y]];
            let c = k(b.row, b.col);
            // u_row + v_col = c
            pot[y] = c - pot[x];
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Brings arc `(row, col)` into the basis; returns the step size.
    fn pivot(&mut self, row: usize, col: usize) -> f64 {
        // tree path from the column vertex to the row vertex
        let (mut a, mut b) = (self.m + col, row);
        let mut from_a = Vec::new();
        let mut from_b = Vec::new();
        while self.depth[a] > self.depth[b] {
            from_a.push(self.parent_arc[a]);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            from_b.push(self.parent_arc[b]);
            b = self.parent[b];
        }
        while a != b {
            from_a.push(self.parent_arc[a]);
            a = self.parent[a];
            from_b.push(self.parent_arc[b]);
            b = self.parent[b];
        }
        from_a.extend(from_b.into_iter().rev());
        let path = from_a;
        // signs alternate −, +, −, ... starting next to the column vertex
        let mut theta = f64::INFINITY;
        let mut leave = 0;
        for &arc in path.iter().step_by(2) {
            let f = self.basis[arc].flow;
            if f < theta {
                theta = f;
                leave = arc;
            }
        }
        for (k, &arc) in path.iter().enumerate() {
            if k % 2 == 0 {
                self.basis[arc].flow -= theta;
            } else {
                self.basis[arc].flow += theta;
            }
        }
        let old = self.basis[leave];
        self.is_basic[old.row * self.n + old.col] = false;
        self.basis[leave] = BasicArc {
            row,
            col,
            flow: theta,
        };
        self.is_basic[row * self.n + col] = true;
        theta
    }
}

/// Whether sampled values `log_rho` are c-concave on the nodes: equal to
/// their double c-transform `min_i (ψ_i + k_ji)` with
/// `ψ_i = max_j (log ρ_j − k_ji)`, to `1e-9`.
pub fn is_c_concave(cost: &CostMatrix, log_rho: &[f64]) -> bool {
    let (m, n) = (cost.rows, cost.cols);
    if log_rho.len() != m {
        return false;
    }
    let mut psi = vec![f64::NEG_INFINITY; n];
    for (j, &phi) in log_rho.iter().enumerate() {
        for (i, p) in psi.iter_mut().enumerate() {
            let k = cost.min_plus(j, i);
            if k.is_finite() {
                *p = p.max(phi - k);
            }
        }
    }
    log_rho.iter().enumerate().all(|(j, &phi)| {
        let cc = (0..n)
            .filter(|&i| cost.min_plus(j, i).is_finite() && psi[i].is_finite())
            .map(|i| psi[i] + cost.min_plus(j, i))
            .fold(f64::INFINITY, f64::min);
        (cc - phi).abs() <= CONCAVITY_TOL * (1.0 + phi.abs())
    })
}

/// Checks the support characterization of a refractor on `src`: `log ρ` is
/// c-concave and `min_i (log b_i + k(x, m_i))` is attained by the target the
/// refractor maps `x` to.
pub fn check_c_concavity<const D: usize>(
    pair: &MediumPair<D>,
    r: &Refractor<D>,
    src: &SourceDensity<D>,
) -> Result<bool> {
    let cost = build_cost(pair, src, r.target())?;
    let log_b: Vec<f64> = r.radii().iter().map(|b| libm::log(*b)).collect();
    let mut log_rho = Vec::with_capacity(src.len());
    for (j, x) in src.nodes().iter().enumerate() {
        let rho = r.radius(x);
        if !(rho > 0.0 && rho.is_finite()) {
            return Ok(false);
        }
        let lr = libm::log(rho);
        let (best, val) = (0..cost.cols)
            .map(|i| (i, log_b[i] + cost.min_plus(j, i)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if (val - lr).abs() > CONCAVITY_TOL * (1.0 + lr.abs()) {
            return Ok(false);
        }
        let ties = r.map(x);
        let gap_ok = ties.contains(&best)
            || ties
                .iter()
                .any(|&i| (log_b[i] + cost.min_plus(j, i) - val).abs() <= CONCAVITY_TOL);
        if !gap_ok {
            return Ok(false);
        }
        log_rho.push(lr);
    }
    Ok(is_c_concave(&cost, &log_rho))
}

/// Comparison of a refractor map with the exact optimal plan between the
/// source and the energy the refractor delivers.
#[derive(Clone, Debug, PartialEq)]
pub struct Agreement {
    pub nodes: usize,
    pub targets: usize,
    pub total: f64,
    /// Mass of nodes whose two best supporting surfaces are within the band.
    pub tie_band_mass: f64,
    /// Mass of nodes outside the band that the plan sends elsewhere.
    pub mismatched_mass: f64,
    pub objective_plan: f64,
    pub objective_refractor: f64,
    /// `|objective_refractor − objective_plan| / |objective_plan|`.
    pub relative_gap: f64,
    pub pivots: usize,
}

/// Solves the exact transport problem with marginals `(w, M)` where `M` is
/// the refractor measure on `src`, and compares plans. Nodes whose two
/// smallest `log b_i + k` differ by at most `band` form the tie band.
pub fn assignment_agreement<const D: usize>(
    pair: &MediumPair<D>,
    r: &Refractor<D>,
    src: &SourceDensity<D>,
    band: f64,
) -> Result<Agreement> {
    let cost = build_cost(pair, src, r.target())?;
    let report = r.measure(src);
    let plan = solve_ot_exact(&cost, src.weights(), &report.masses)?;
    let planned = plan.assignment();
    let log_b: Vec<f64> = r.radii().iter().map(|b| libm::log(*b)).collect();
    let w = src.weights();
    let mut band_parts = Vec::new();
    let mut miss_parts = Vec::new();
    let mut refr_terms = Vec::new();
    for j in 0..src.len() {
        let mut vals: Vec<(f64, usize)> = (0..cost.cols)
            .map(|i| (log_b[i] + cost.min_plus(j, i), i))
            .collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let ties = r.map(&src.nodes()[j]);
        let share = w[j] / ties.len().max(1) as f64;
        for &i in &ties {
            refr_terms.push(share * cost.get(j, i));
        }
        if vals.len() > 1 && vals[1].0 - vals[0].0 <= band {
            band_parts.push(w[j]);
        } else if planned[j] != report.assignment[j] {
            miss_parts.push(w[j]);
        }
    }
    let objective_refractor = pairwise_sum(&refr_terms);
    let relative_gap = (objective_refractor - plan.objective).abs() / plan.objective.abs().max(f64::MIN_POSITIVE);
    Ok(Agreement {
        nodes: src.len(),
        targets: cost.cols,
        total: src.total(),
        tie_band_mass: pairwise_sum(&band_parts),
        mismatched_mass: pairwise_sum(&miss_parts),
        objective_plan: plan.objective,
        objective_refractor,
        relative_gap,
        pivots: plan.pivots,
    })
}
