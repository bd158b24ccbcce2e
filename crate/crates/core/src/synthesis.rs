//! Columnwise H2 synthesis of the closed-loop response under support
//! constraints.
//!
//! For a horizon-`T` FIR response pair the achievability constraints are,
//! blockwise in the delay index,
//!
//! ```text
//!   phi_x[1] = I
//!   phi_x[tau+1] = A phi_x[tau] + B phi_u[tau]    for tau = 1..T-1
//!   A phi_x[T] + B phi_u[T] = 0
//! ```
//!
//! and the objective is the H2 norm of the closed loop,
//! `sum_tau tr(phi_x[tau]' Q phi_x[tau]) + tr(phi_u[tau]' R phi_u[tau])`,
//! which equals the stationary per-step LQG cost under unit-covariance
//! disturbances. Both the constraints and the objective act on each column
//! of the response independently, so the problem splits into one
//! equality-constrained least-squares problem per disturbance site, each
//! involving only the variables allowed by the support mask for that column.
//!
//! Each column is solved from the KKT system of its reduced problem. The
//! first state tap is eliminated exactly (its entries are pinned to the
//! identity), which keeps `phi_x[1] = I` and the masked-out entries exact
//! zeros in the assembled response. Support masks on graphs routinely make
//! some constraint rows linearly dependent, so a failed or inaccurate KKT
//! solve falls back to re-solving over an independent row subset, and, if
//! constraints remain violated, a least-squares residual computed by SVD
//! decides between reporting infeasibility and a numerical failure.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::mask::SupportMask;
use crate::plant::PlantModel;
use crate::response::SystemResponse;
use crate::tol;

/// H2 synthesis instance: plant, FIR horizon, cost weights, and support mask.
///
/// `q` must be PSD and `r` PD; the mask must match the plant dimensions and
/// the horizon. The synthesized response minimizes the H2 objective under
/// unit disturbance covariance, which is also optimal for any diagonal
/// covariance since scaling columns does not move the per-column minimizer.
#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    pub plant: PlantModel,
    pub horizon: usize,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub mask: SupportMask,
}

impl SynthesisProblem {
    pub fn new(
        plant: PlantModel,
        horizon: usize,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        mask: SupportMask,
    ) -> Result<Self> {
        let problem = Self {
            plant,
            horizon,
            q,
            r,
            mask,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.plant.n_states();
        let m = self.plant.n_inputs();
        if self.horizon == 0 {
            return Err(Error::InvalidArgument(
                "synthesis horizon must be at least 1".into(),
            ));
        }
        if self.mask.horizon() != self.horizon {
            return Err(Error::DimensionMismatch(format!(
                "mask horizon {} differs from synthesis horizon {}",
                self.mask.horizon(),
                self.horizon
            )));
        }
        if self.mask.n_states() != n || self.mask.n_inputs() != m {
            return Err(Error::DimensionMismatch(format!(
                "mask is {}x{} but plant is {n}x{m}",
                self.mask.n_states(),
                self.mask.n_inputs()
            )));
        }
        if self.q.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Q must be {n}x{n}, got {}x{}",
                self.q.nrows(),
                self.q.ncols()
            )));
        }
        if self.r.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "R must be {m}x{m}, got {}x{}",
                self.r.nrows(),
                self.r.ncols()
            )));
        }
        linalg::check_psd("Q", &self.q)?;
        linalg::check_pd("R", &self.r)?;
        Ok(())
    }
}

/// Max-abs violation of each achievability block: index 0 is the identity
/// pin on the first state tap, index `tau` in `1..T` the recursion at delay
/// `tau`, and index `T` the FIR truncation condition.
pub fn achievability_residual(plant: &PlantModel, phi: &SystemResponse) -> Result<Vec<f64>> {
    let (n, m) = (plant.n_states(), plant.n_inputs());
    if phi.n_states() != n || phi.n_inputs() != m {
        return Err(Error::DimensionMismatch(format!(
            "response is {}x{} but plant is {n}x{m}",
            phi.n_states(),
            phi.n_inputs()
        )));
    }
    let t = phi.horizon();
    let mut residuals = Vec::with_capacity(t + 1);
    residuals.push(linalg::max_abs(&(phi.x_at(1) - DMatrix::identity(n, n))));
    for tau in 1..t {
        let step = phi.x_at(tau + 1) - &plant.a * phi.x_at(tau) - &plant.b * phi.u_at(tau);
        residuals.push(linalg::max_abs(&step));
    }
    residuals.push(linalg::max_abs(
        &(&plant.a * phi.x_at(t) + &plant.b * phi.u_at(t)),
    ));
    Ok(residuals)
}

/// H2 cost of a response under weights `(q, r)` and disturbance covariance
/// `sigma_w`: the stationary per-step expected cost of the closed loop.
pub fn h2_cost(
    phi: &SystemResponse,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    sigma_w: &DMatrix<f64>,
) -> Result<f64> {
    let (n, m) = (phi.n_states(), phi.n_inputs());
    if q.shape() != (n, n) || r.shape() != (m, m) || sigma_w.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "weights Q {}x{}, R {}x{}, sigma_w {}x{} for a {n}x{m} response",
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols(),
            sigma_w.nrows(),
            sigma_w.ncols()
        )));
    }
    linalg::check_psd("Q", q)?;
    linalg::check_psd("R", r)?;
    linalg::check_psd("sigma_w", sigma_w)?;
    let mut cost = 0.0;
    for tau in 1..=phi.horizon() {
        let px = phi.x_at(tau);
        let pu = phi.u_at(tau);
        // tr(P' W P S) as the Frobenius inner product <P, W P S>.
        cost += px.dot(&(q * px * sigma_w));
        cost += pu.dot(&(r * pu * sigma_w));
    }
    Ok(cost)
}

/// One scalar unknown of a column problem: entry `row` of a response tap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Var {
    X { tau: usize, row: usize },
    U { tau: usize, row: usize },
}

/// Grouping key for columns that share a factorization: the free variables
/// and the names (not values) of the pinned ones.
type StructureKey = (Vec<Var>, Vec<Var>);

/// Constraint matrix, objective Hessian, and variable lists shared by every
/// column with the same support pattern. The coefficients depend only on
/// which variables the mask admits, not on the column index; all
/// column-specific data lives in the right-hand side.
#[derive(Debug, Clone)]
struct ColumnStructure {
    n: usize,
    m: usize,
    horizon: usize,
    /// Mask-admitted unknowns, sorted; excludes the pinned first state tap.
    free: Vec<Var>,
    /// Mask-admitted entries of the first state tap, pinned to the identity.
    fixed_names: Vec<Var>,
    /// Full constraint matrix over the free variables, `n (T+1)` rows.
    c: DMatrix<f64>,
    /// Objective Hessian over the free variables (block diagonal in the
    /// taps, with blocks drawn from Q and R).
    h: DMatrix<f64>,
}

/// Reduced synthesis problem for a single disturbance site: the
/// achievability constraints and quadratic objective restricted to the
/// variables the support mask admits in that column.
#[derive(Debug, Clone)]
pub struct ColumnProblem {
    column: usize,
    structure: ColumnStructure,
    fixed: Vec<(Var, f64)>,
    rhs: DVector<f64>,
}

impl ColumnProblem {
    pub fn column(&self) -> usize {
        self.column
    }

    /// Constraint rows before any elimination: `n (T+1)`.
    pub fn n_constraint_rows(&self) -> usize {
        self.structure.c.nrows()
    }

    pub fn n_free_variables(&self) -> usize {
        self.structure.free.len()
    }

    /// Variables pinned exactly by the identity on the first state tap.
    pub fn n_fixed_variables(&self) -> usize {
        self.fixed.len()
    }
}

/// Solved column: column `column` of every state tap (as an `n x T` matrix)
/// and of every input tap (`m x T`).
#[derive(Debug, Clone)]
pub struct ColumnSolution {
    pub column: usize,
    pub x: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

fn column_vars(mask: &SupportMask, j: usize) -> StructureKey {
    let horizon = mask.horizon();
    let mut free = Vec::new();
    let mut fixed = Vec::new();
    for tau in 1..=horizon {
        for row in 0..mask.n_states() {
            if mask.x_at(tau)[(row, j)] {
                if tau == 1 {
                    fixed.push(Var::X { tau, row });
                } else {
                    free.push(Var::X { tau, row });
                }
            }
        }
        for row in 0..mask.n_inputs() {
            if mask.u_at(tau)[(row, j)] {
                free.push(Var::U { tau, row });
            }
        }
    }
    free.sort_unstable();
    fixed.sort_unstable();
    (free, fixed)
}

fn build_structure(
    prob: &SynthesisProblem,
    free: Vec<Var>,
    fixed_names: Vec<Var>,
) -> ColumnStructure {
    let n = prob.plant.n_states();
    let m = prob.plant.n_inputs();
    let t = prob.horizon;
    let a = &prob.plant.a;
    let b = &prob.plant.b;
    let nf = free.len();
    let mut c = DMatrix::zeros(n * (t + 1), nf);
    let at = |var: Var| free.binary_search(&var).ok();
    // Identity-pin rows touch only the first state tap, which is never free,
    // so the first block of C stays zero. Recursion blocks at delay tau:
    for tau in 1..t {
        for rr in 0..n {
            let row = tau * n + rr;
            if let Some(p) = at(Var::X {
                tau: tau + 1,
                row: rr,
            }) {
                c[(row, p)] = 1.0;
            }
            if tau > 1 {
                for k in 0..n {
                    if a[(rr, k)] != 0.0 {
                        if let Some(p) = at(Var::X { tau, row: k }) {
                            c[(row, p)] = -a[(rr, k)];
                        }
                    }
                }
            }
            for k in 0..m {
                if b[(rr, k)] != 0.0 {
                    if let Some(p) = at(Var::U { tau, row: k }) {
                        c[(row, p)] = -b[(rr, k)];
                    }
                }
            }
        }
    }
    // FIR truncation block.
    for rr in 0..n {
        let row = t * n + rr;
        if t > 1 {
            for k in 0..n {
                if a[(rr, k)] != 0.0 {
                    if let Some(p) = at(Var::X { tau: t, row: k }) {
                        c[(row, p)] = a[(rr, k)];
                    }
                }
            }
        }
        for k in 0..m {
            if b[(rr, k)] != 0.0 {
                if let Some(p) = at(Var::U { tau: t, row: k }) {
                    c[(row, p)] = b[(rr, k)];
                }
            }
        }
    }
    let mut h = DMatrix::zeros(nf, nf);
    for p in 0..nf {
        for s in 0..nf {
            match (free[p], free[s]) {
                (Var::X { tau: tp, row: rp }, Var::X { tau: ts, row: rs }) if tp == ts => {
                    h[(p, s)] = prob.q[(rp, rs)];
                }
                (Var::U { tau: tp, row: rp }, Var::U { tau: ts, row: rs }) if tp == ts => {
                    h[(p, s)] = prob.r[(rp, rs)];
                }
                _ => {}
            }
        }
    }
    ColumnStructure {
        n,
        m,
        horizon: t,
        free,
        fixed_names,
        c,
        h,
    }
}

fn fixed_assignments(fixed_names: &[Var], j: usize) -> Vec<(Var, f64)> {
    fixed_names
        .iter()
        .map(|&var| match var {
            Var::X { row, .. } => (var, if row == j { 1.0 } else { 0.0 }),
            Var::U { .. } => unreachable!("input taps are never pinned"),
        })
        .collect()
}

fn build_rhs(prob: &SynthesisProblem, j: usize, fixed: &[(Var, f64)]) -> DVector<f64> {
    let n = prob.plant.n_states();
    let t = prob.horizon;
    let a = &prob.plant.a;
    let mut rhs = DVector::zeros(n * (t + 1));
    rhs[j] = 1.0;
    for &(var, value) in fixed {
        let Var::X { row, .. } = var else {
            unreachable!()
        };
        // Identity-pin row of this entry.
        rhs[row] -= value;
        if value != 0.0 {
            if t > 1 {
                // -A[., row] moves to the right in the delay-1 recursion.
                for rr in 0..n {
                    rhs[n + rr] += a[(rr, row)] * value;
                }
            } else {
                // With T = 1 the first tap feeds the truncation block.
                for rr in 0..n {
                    rhs[n + rr] -= a[(rr, row)] * value;
                }
            }
        }
    }
    rhs
}

/// Restriction of `prob` to column `j` of the response.
pub fn extract_column_problem(prob: &SynthesisProblem, j: usize) -> Result<ColumnProblem> {
    prob.validate()?;
    let n = prob.plant.n_states();
    if j >= n {
        return Err(Error::InvalidArgument(format!(
            "column {j} out of range for {n} states"
        )));
    }
    let (free, fixed_names) = column_vars(&prob.mask, j);
    let structure = build_structure(prob, free, fixed_names);
    let fixed = fixed_assignments(&structure.fixed_names, j);
    let rhs = build_rhs(prob, j, &fixed);
    Ok(ColumnProblem {
        column: j,
        structure,
        fixed,
        rhs,
    })
}

fn kkt_matrix(h: &DMatrix<f64>, c: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let f = h.nrows();
    let k = rows.len();
    let mut kkt = DMatrix::zeros(f + k, f + k);
    kkt.view_mut((0, 0), (f, f)).copy_from(h);
    for (idx, &row) in rows.iter().enumerate() {
        for p in 0..f {
            let coef = c[(row, p)];
            kkt[(f + idx, p)] = coef;
            kkt[(p, f + idx)] = coef;
        }
    }
    kkt
}

/// Indices (into the original row numbering) of a maximal independent subset
/// of the given rows, found by row echelon reduction with partial pivoting.
/// Dependent rows arising from support masks cancel to roundoff, far below
/// the pivot threshold.
fn independent_rows(c: &DMatrix<f64>, rows: &[usize]) -> Vec<usize> {
    let mut work = c.select_rows(rows.iter());
    let mut labels: Vec<usize> = rows.to_vec();
    let k = work.nrows();
    let f = work.ncols();
    let threshold = 1e-11 * linalg::max_abs(&work).max(1.0);
    let mut kept = Vec::new();
    let mut frontier = 0;
    for col in 0..f {
        if frontier == k {
            break;
        }
        let (best, best_abs) = (frontier..k)
            .map(|r| (r, work[(r, col)].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty pivot range");
        if best_abs <= threshold {
            continue;
        }
        work.swap_rows(frontier, best);
        labels.swap(frontier, best);
        kept.push(labels[frontier]);
        let pivot = work[(frontier, col)];
        for r in (frontier + 1)..k {
            let factor = work[(r, col)] / pivot;
            if factor != 0.0 {
                for cc in col..f {
                    let delta = factor * work[(frontier, cc)];
                    work[(r, cc)] -= delta;
                }
            }
        }
        frontier += 1;
    }
    kept.sort_unstable();
    kept
}

struct KktSystem {
    rows: Vec<usize>,
    kkt: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl KktSystem {
    fn new(structure: &ColumnStructure, rows: Vec<usize>) -> Self {
        let kkt = kkt_matrix(&structure.h, &structure.c, &rows);
        let lu = kkt.clone().lu();
        Self { rows, kkt, lu }
    }

    /// LU solve with one step of iterative refinement; `None` when the
    /// factorization is singular or the refined residual stays large.
    fn solve(&self, f: usize, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let dim = f + self.rows.len();
        let mut b = DVector::zeros(dim);
        for (idx, &row) in self.rows.iter().enumerate() {
            b[f + idx] = rhs[row];
        }
        let mut z = self.lu.solve(&b)?;
        let correction = self.lu.solve(&(&b - &self.kkt * &z))?;
        z += correction;
        let residual = (&self.kkt * &z - &b).amax();
        if !residual.is_finite() || residual > tol::KKT_RESIDUAL_TOL * (1.0 + b.amax()) {
            return None;
        }
        Some(z.rows(0, f).into_owned())
    }
}

/// Per-structure solver state: the KKT factorization over all structurally
/// nonzero constraint rows, plus a lazily built fallback over an independent
/// row subset. Columns sharing a support pattern share both.
struct GroupSolver {
    kept: Vec<usize>,
    primary: Option<KktSystem>,
    fallback: Option<KktSystem>,
}

impl GroupSolver {
    fn new(structure: &ColumnStructure) -> Self {
        let c = &structure.c;
        let kept: Vec<usize> = (0..c.nrows())
            .filter(|&row| (0..c.ncols()).any(|p| c[(row, p)] != 0.0))
            .collect();
        let primary = (!kept.is_empty()).then(|| KktSystem::new(structure, kept.clone()));
        Self {
            kept,
            primary,
            fallback: None,
        }
    }

    fn solve_one(
        &mut self,
        structure: &ColumnStructure,
        fixed: &[(Var, f64)],
        rhs: &DVector<f64>,
        column: usize,
    ) -> Result<ColumnSolution> {
        let f = structure.free.len();
        let acceptable = |v: &DVector<f64>| {
            v.iter().all(|x| x.is_finite())
                && constraint_residual(&structure.c, rhs, v)
                    <= tol::KKT_RESIDUAL_TOL * (1.0 + rhs.amax())
        };
        let mut solution = if self.kept.is_empty() {
            Some(DVector::zeros(f))
        } else {
            self.primary.as_ref().and_then(|sys| sys.solve(f, rhs))
        };
        if !solution.as_ref().is_some_and(&acceptable) {
            if !self.kept.is_empty() {
                let fallback = self.fallback.get_or_insert_with(|| {
                    KktSystem::new(structure, independent_rows(&structure.c, &self.kept))
                });
                solution = fallback.solve(f, rhs);
            }
            if !solution.as_ref().is_some_and(&acceptable) {
                return Err(classify_failure(structure, rhs, column));
            }
        }
        Ok(scatter(
            structure,
            fixed,
            &solution.expect("checked above"),
            column,
        ))
    }
}

fn constraint_residual(c: &DMatrix<f64>, rhs: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (c * v - rhs).amax()
}

/// Decides whether a failed column is infeasible (the constraints themselves
/// are inconsistent under the mask) or a genuine numerical failure, by
/// computing the least-squares residual of the constraint system.
fn classify_failure(structure: &ColumnStructure, rhs: &DVector<f64>, column: usize) -> Error {
    let residual = if structure.free.is_empty() {
        rhs.norm()
    } else {
        let svd = structure.c.clone().svd(true, true);
        let eps = 1e-12 * svd.singular_values.max().max(1.0);
        match svd.solve(rhs, eps) {
            Ok(v) => (&structure.c * v - rhs).norm(),
            Err(msg) => return Error::Numerical(format!("column {column}: {msg}")),
        }
    };
    if residual > tol::INFEASIBILITY_TOL {
        Error::Infeasible {
            columns: vec![column],
            residual,
        }
    } else {
        Error::Numerical(format!(
            "column {column}: constraints are consistent but the KKT solve failed \
             (degenerate objective?)"
        ))
    }
}

fn scatter(
    structure: &ColumnStructure,
    fixed: &[(Var, f64)],
    v: &DVector<f64>,
    column: usize,
) -> ColumnSolution {
    let mut x = DMatrix::zeros(structure.n, structure.horizon);
    let mut u = DMatrix::zeros(structure.m, structure.horizon);
    for &(var, value) in fixed {
        let Var::X { tau, row } = var else {
            unreachable!()
        };
        x[(row, tau - 1)] = value;
    }
    for (p, &var) in structure.free.iter().enumerate() {
        match var {
            Var::X { tau, row } => x[(row, tau - 1)] = v[p],
            Var::U { tau, row } => u[(row, tau - 1)] = v[p],
        }
    }
    ColumnSolution { column, x, u }
}

/// Solves one column problem. Shares its code path with [`synthesize`], so a
/// standalone column solve reproduces the corresponding column of the full
/// synthesis bit for bit.
pub fn solve_column(cp: &ColumnProblem) -> Result<ColumnSolution> {
    GroupSolver::new(&cp.structure).solve_one(&cp.structure, &cp.fixed, &cp.rhs, cp.column)
}

/// Stitches per-column solutions (in any order) into a response; every
/// column must appear exactly once with consistent shapes.
pub fn assemble(
    n_states: usize,
    n_inputs: usize,
    horizon: usize,
    columns: &[ColumnSolution],
) -> Result<SystemResponse> {
    if columns.len() != n_states {
        return Err(Error::InvalidArgument(format!(
            "expected {n_states} column solutions, got {}",
            columns.len()
        )));
    }
    let mut phi_x = vec![DMatrix::zeros(n_states, n_states); horizon];
    let mut phi_u = vec![DMatrix::zeros(n_inputs, n_states); horizon];
    let mut seen = vec![false; n_states];
    for sol in columns {
        let j = sol.column;
        if j >= n_states {
            return Err(Error::InvalidArgument(format!("column {j} out of range")));
        }
        if seen[j] {
            return Err(Error::InvalidArgument(format!(
                "duplicate solution for column {j}"
            )));
        }
        seen[j] = true;
        if sol.x.shape() != (n_states, horizon) || sol.u.shape() != (n_inputs, horizon) {
            return Err(Error::DimensionMismatch(format!(
                "column {j} solution has shape x {}x{}, u {}x{}",
                sol.x.nrows(),
                sol.x.ncols(),
                sol.u.nrows(),
                sol.u.ncols()
            )));
        }
        for tau in 0..horizon {
            phi_x[tau].set_column(j, &sol.x.column(tau));
            phi_u[tau].set_column(j, &sol.u.column(tau));
        }
    }
    SystemResponse::new(phi_x, phi_u)
}

/// Synthesizes the H2-optimal achievable response under the support mask.
///
/// Columns are grouped by support pattern so that structurally identical
/// column problems share one KKT factorization; groups solve independently
/// (in parallel when a rayon pool with more than one thread is installed,
/// with results assembled in a fixed order either way). If any columns are
/// infeasible the full sorted list is reported.
pub fn synthesize(prob: &SynthesisProblem) -> Result<SystemResponse> {
    prob.validate()?;
    let n = prob.plant.n_states();
    let mut groups: BTreeMap<StructureKey, Vec<usize>> = BTreeMap::new();
    for j in 0..n {
        groups
            .entry(column_vars(&prob.mask, j))
            .or_default()
            .push(j);
    }
    let groups: Vec<(StructureKey, Vec<usize>)> = groups.into_iter().collect();
    let outcomes: Vec<Vec<(usize, Result<ColumnSolution>)>> = groups
        .into_par_iter()
        .map(|((free, fixed_names), members)| {
            let structure = build_structure(prob, free, fixed_names);
            let mut solver = GroupSolver::new(&structure);
            members
                .into_iter()
                .map(|j| {
                    let fixed = fixed_assignments(&structure.fixed_names, j);
                    let rhs = build_rhs(prob, j, &fixed);
                    (j, solver.solve_one(&structure, &fixed, &rhs, j))
                })
                .collect()
        })
        .collect();

    let mut flat: Vec<(usize, Result<ColumnSolution>)> = outcomes.into_iter().flatten().collect();
    flat.sort_by_key(|(j, _)| *j);
    let mut solutions = Vec::with_capacity(n);
    let mut infeasible = Vec::new();
    let mut worst_residual = 0.0f64;
    let mut first_other: Option<Error> = None;
    for (_, outcome) in flat {
        match outcome {
            Ok(sol) => solutions.push(sol),
            Err(Error::Infeasible { columns, residual }) => {
                infeasible.extend(columns);
                worst_residual = worst_residual.max(residual);
            }
            Err(e) => first_other = first_other.or(Some(e)),
        }
    }
    if !infeasible.is_empty() {
        infeasible.sort_unstable();
        return Err(Error::Infeasible {
            columns: infeasible,
            residual: worst_residual,
        });
    }
    if let Some(e) = first_other {
        return Err(e);
    }
    let phi = assemble(n, prob.plant.n_inputs(), prob.horizon, &solutions)?;
    let worst = achievability_residual(&prob.plant, &phi)?
        .into_iter()
        .fold(0.0f64, f64::max);
    if worst > tol::ACHIEVABILITY_TOL {
        return Err(Error::NotAchievable {
            residual: worst,
            tol: tol::ACHIEVABILITY_TOL,
        });
    }
    Ok(phi)
}
