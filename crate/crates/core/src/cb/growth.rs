use std::collections::HashSet;

use super::cluster::{ClosedBranch, Cluster, GrowthMode, NONE};
use super::{CbParams, GrowthStats};
use crate::gf2::BinaryMatrix;

const BUDGET_EPS: f64 = 1e-9;

/// An open branch: its mechanisms, the check it grows through next and the
/// deferred unbalanced checks ("future checks to search").
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// Mechanisms in the order they were added; the first is the seed.
    pub mechanisms: Vec<usize>,
    /// Unbalanced check currently being grown.
    pub frontier: usize,
    /// Other unbalanced checks, ascending.
    pub fcts: Vec<usize>,
    /// Open branches of the instance when this one was created.
    pub spawned: usize,
    /// Accumulated mechanism cost: one per mechanism, or event weights.
    pub weight_used: f64,
    dismantled: Vec<u32>,
}

impl Branch {
    pub fn growths(&self) -> usize {
        self.mechanisms.len() - 1
    }

    fn key(&self) -> Vec<usize> {
        let mut key = self.mechanisms.clone();
        key.sort_unstable();
        if !self.dismantled.is_empty() {
            let mut d: Vec<usize> = self.dismantled.iter().map(|&s| s as usize).collect();
            d.sort_unstable();
            key.push(usize::MAX);
            key.extend(d);
        }
        key
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GrowthOutcome {
    Closed {
        branch: ClosedBranch,
        /// Cluster slots the branch dismantled on its way.
        dismantled: Vec<u32>,
        weight_used: f64,
    },
    TooManyBranches,
    BudgetExhausted,
}

enum Eval {
    Open(Branch),
    Closed(ClosedBranch, Vec<u32>),
    /// Balanced everywhere but flips no check.
    Empty,
}

/// Growth engine bound to one noise parity-check matrix.
///
/// `costs` switches on weighted growth: mechanism `i` costs `costs[i]`
/// against the budget and cheaper candidates are preferred. Without costs
/// every mechanism costs 1.
pub struct CbEngine<'a> {
    matrix: &'a BinaryMatrix,
    params: CbParams,
    costs: Option<&'a [f64]>,
    stats: GrowthStats,
    scratch: Vec<usize>,
}

impl<'a> CbEngine<'a> {
    pub fn new(matrix: &'a BinaryMatrix, params: CbParams) -> Self {
        CbEngine {
            matrix,
            params,
            costs: None,
            stats: GrowthStats::default(),
            scratch: Vec::new(),
        }
    }

    pub fn weighted(matrix: &'a BinaryMatrix, params: CbParams, costs: &'a [f64]) -> Self {
        assert_eq!(costs.len(), matrix.cols(), "one cost per mechanism");
        CbEngine {
            costs: Some(costs),
            ..Self::new(matrix, params)
        }
    }

    pub fn stats(&self) -> &GrowthStats {
        &self.stats
    }

    pub fn into_stats(self) -> GrowthStats {
        self.stats
    }

    fn cost(&self, mech: usize) -> f64 {
        self.costs.map_or(1.0, |c| c[mech])
    }

    /// Budgets of the weight iterations: `2..=max_gr` mechanisms for plain
    /// growth, `step * max(costs)` for `step` in `1..=max_gr` when weighted.
    pub fn budgets(&self) -> Vec<f64> {
        match self.costs {
            None => (2..=self.params.max_gr).map(|w| w as f64).collect(),
            Some(costs) => {
                let top = costs.iter().copied().fold(f64::MIN, f64::max);
                (1..=self.params.max_gr).map(|s| s as f64 * top).collect()
            }
        }
    }

    /// Columns adjacent to at least one nontrivial check and not yet used by
    /// the cluster, in processing order.
    fn active_columns(&self, cluster: &Cluster) -> Vec<usize> {
        let eff = cluster.effective_syndrome();
        let mut cols: Vec<usize> = eff
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .flat_map(|(r, _)| self.matrix.row(r).iter().copied())
            .filter(|&c| cluster.mech_owner(c) == NONE)
            .collect();
        cols.sort_unstable();
        cols.dedup();
        if let Some(costs) = self.costs {
            cols.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        }
        cols
    }

    /// Adds every unused column whose checks are all nontrivial as a
    /// single-mechanism closed branch.
    pub fn weight_1_errors(&mut self, cluster: &mut Cluster) {
        for c in self.active_columns(cluster) {
            let rows = self.matrix.col(c);
            if !rows.is_empty() && rows.iter().all(|&r| cluster.is_nontrivial(r)) {
                cluster.insert(ClosedBranch {
                    mechanisms: vec![c],
                    checks_flipped: rows.to_vec(),
                    mode: GrowthMode::NonDestructive,
                });
                self.stats.closed += 1;
            }
        }
    }

    fn seed(&self, col: usize, tcts: usize, cluster: &Cluster) -> Option<Branch> {
        if cluster.mech_owner(col) != NONE {
            return None;
        }
        let rows = self.matrix.col(col);
        let trivial: Vec<usize> = rows.iter().copied().filter(|&r| !cluster.is_nontrivial(r)).collect();
        if trivial.len() != tcts || trivial.len() == rows.len() {
            return None;
        }
        Some(Branch {
            mechanisms: vec![col],
            frontier: trivial[0],
            fcts: trivial[1..].to_vec(),
            spawned: 1,
            weight_used: self.cost(col),
            dismantled: Vec::new(),
        })
    }

    /// Seeds touching at least one nontrivial check and exactly `tcts`
    /// trivial ones. The lowest trivial check becomes the frontier.
    pub fn find_branch_instances(&self, tcts: usize, cluster: &Cluster) -> Vec<Branch> {
        if tcts == 0 {
            return Vec::new();
        }
        self.active_columns(cluster)
            .into_iter()
            .filter_map(|c| self.seed(c, tcts, cluster))
            .collect()
    }

    fn evaluate(
        &mut self,
        mechanisms: Vec<usize>,
        mut dismantled: Vec<u32>,
        weight_used: f64,
        mode: GrowthMode,
        cluster: &Cluster,
    ) -> Eval {
        let newest = *mechanisms.last().expect("nonempty branch");
        if mode == GrowthMode::Destructive {
            for &r in self.matrix.col(newest) {
                let owner = cluster.row_owner(r);
                if owner != NONE
                    && cluster.slot_mode(owner) == Some(GrowthMode::NonDestructive)
                    && !dismantled.contains(&owner)
                    && dismantled.len() < self.params.max_br
                {
                    dismantled.push(owner);
                }
            }
        }

        let scratch = &mut self.scratch;
        scratch.clear();
        for &m in &mechanisms {
            scratch.extend_from_slice(self.matrix.col(m));
        }
        scratch.sort_unstable();

        let view = |r: usize| {
            if cluster.is_nontrivial(r) {
                return true;
            }
            let owner = cluster.row_owner(r);
            owner != NONE && dismantled.contains(&owner)
        };

        let mut defects = Vec::new();
        let mut flipped = Vec::new();
        for run in scratch.chunk_by(|a, b| a == b) {
            let r = run[0];
            let odd = run.len() % 2 == 1;
            if odd {
                flipped.push(r);
            }
            if odd != view(r) {
                defects.push(r);
            }
        }

        if defects.is_empty() {
            if flipped.is_empty() {
                return Eval::Empty;
            }
            let mut sorted = mechanisms;
            sorted.sort_unstable();
            return Eval::Closed(
                ClosedBranch {
                    mechanisms: sorted,
                    checks_flipped: flipped,
                    mode,
                },
                dismantled,
            );
        }

        let newest_rows = self.matrix.col(newest);
        let frontier_pos = defects
            .iter()
            .position(|r| newest_rows.binary_search(r).is_ok())
            .unwrap_or(0);
        let frontier = defects.remove(frontier_pos);
        Eval::Open(Branch {
            mechanisms,
            frontier,
            fcts: defects,
            spawned: 1,
            weight_used,
            dismantled,
        })
    }

    fn closed(&mut self, branch: ClosedBranch, dismantled: Vec<u32>, weight_used: f64, growths: usize) -> GrowthOutcome {
        self.stats.closed += 1;
        self.stats.max_growths = self.stats.max_growths.max(growths);
        GrowthOutcome::Closed {
            branch,
            dismantled,
            weight_used,
        }
    }

    /// Grows `seed` until some branch closes, too many branches are open, or
    /// the budget runs out.
    pub fn grow_branch(&mut self, seed: &Branch, mode: GrowthMode, budget: f64, cluster: &Cluster) -> GrowthOutcome {
        self.stats.branch_instances += 1;
        let max_br = self.params.max_br;
        let max_gr = self.params.max_gr;
        self.stats.max_spawned = self.stats.max_spawned.max(1);

        if seed.weight_used > budget + BUDGET_EPS {
            self.stats.rejected_budget += 1;
            return GrowthOutcome::BudgetExhausted;
        }
        let mut live = match self.evaluate(
            seed.mechanisms.clone(),
            seed.dismantled.clone(),
            seed.weight_used,
            mode,
            cluster,
        ) {
            Eval::Open(b) => vec![b],
            Eval::Closed(c, d) => return self.closed(c, d, seed.weight_used, seed.growths()),
            Eval::Empty => {
                self.stats.rejected_budget += 1;
                return GrowthOutcome::BudgetExhausted;
            }
        };

        loop {
            let mut next: Vec<Branch> = Vec::new();
            let mut keys: HashSet<Vec<usize>> = HashSet::new();
            let mut overflow = false;
            let mut best: Option<(f64, ClosedBranch, Vec<u32>, usize)> = None;

            for b in &live {
                if b.mechanisms.len() > max_gr {
                    continue;
                }
                let mut evals: Vec<(usize, f64, usize, Eval)> = Vec::new();
                for &c in self.matrix.row(b.frontier) {
                    if b.mechanisms.contains(&c) {
                        continue;
                    }
                    let owner = cluster.mech_owner(c);
                    if owner != NONE && !b.dismantled.contains(&owner) {
                        continue;
                    }
                    let c_cost = self.cost(c);
                    let used = b.weight_used + c_cost;
                    if used > budget + BUDGET_EPS {
                        continue;
                    }
                    let mut mechs = Vec::with_capacity(b.mechanisms.len() + 1);
                    mechs.extend_from_slice(&b.mechanisms);
                    mechs.push(c);
                    match self.evaluate(mechs, b.dismantled.clone(), used, mode, cluster) {
                        Eval::Empty => {}
                        e @ Eval::Closed(..) => evals.push((0, c_cost, c, e)),
                        Eval::Open(nb) => evals.push((1 + nb.fcts.len(), c_cost, c, Eval::Open(nb))),
                    }
                }
                let Some(min_defects) = evals.iter().map(|e| e.0).min() else {
                    continue;
                };
                if self.costs.is_some() {
                    evals.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)));
                }
                for (defects, c_cost, _, eval) in evals {
                    if defects != min_defects {
                        continue;
                    }
                    match eval {
                        Eval::Closed(cb, d) => {
                            let used = b.weight_used + c_cost;
                            let better = match &best {
                                None => true,
                                Some((w, ..)) => self.costs.is_some() && used < *w - BUDGET_EPS,
                            };
                            if better {
                                best = Some((used, cb, d, b.mechanisms.len()));
                            }
                        }
                        Eval::Open(nb) => {
                            if overflow {
                                continue;
                            }
                            if keys.insert(nb.key()) {
                                next.push(nb);
                                if next.len() > max_br {
                                    overflow = true;
                                }
                            }
                        }
                        Eval::Empty => unreachable!(),
                    }
                }
            }

            if let Some((used, cb, d, growths)) = best {
                return self.closed(cb, d, used, growths);
            }
            if overflow {
                self.stats.rejected_branching += 1;
                return GrowthOutcome::TooManyBranches;
            }
            if next.is_empty() {
                self.stats.rejected_budget += 1;
                return GrowthOutcome::BudgetExhausted;
            }
            let spawned = next.len();
            self.stats.max_spawned = self.stats.max_spawned.max(spawned);
            for nb in &mut next {
                nb.spawned = spawned;
                self.stats.max_growths = self.stats.max_growths.max(nb.growths());
            }
            live = next;
        }
    }

    fn apply(&mut self, cluster: &mut Cluster, outcome: GrowthOutcome) -> bool {
        match outcome {
            GrowthOutcome::Closed { branch, dismantled, .. } => {
                for slot in dismantled {
                    if cluster.dismantle(slot).is_some() {
                        self.stats.dismantled += 1;
                    }
                }
                cluster.insert(branch);
                true
            }
            _ => false,
        }
    }

    /// One sweep over the seeds with `tcts` trivial checks.
    pub fn branch_growth(&mut self, mode: GrowthMode, tcts: usize, cluster: &mut Cluster, budget: f64) {
        for seed in self.find_branch_instances(tcts, cluster) {
            if cluster.is_resolved() {
                return;
            }
            // Earlier closures may have changed the seed's checks.
            let Some(seed) = self.seed(seed.mechanisms[0], tcts, cluster) else {
                continue;
            };
            let outcome = self.grow_branch(&seed, mode, budget, cluster);
            self.apply(cluster, outcome);
        }
    }

    pub fn non_dest_branch_growth(&mut self, tcts: usize, cluster: &mut Cluster, budget: f64) {
        self.branch_growth(GrowthMode::NonDestructive, tcts, cluster, budget);
    }

    pub fn dest_branch_growth(&mut self, tcts: usize, cluster: &mut Cluster, budget: f64) {
        self.branch_growth(GrowthMode::Destructive, tcts, cluster, budget);
    }

    /// One weight iteration of the schedule on a fresh cluster.
    pub fn run_weight(&mut self, syndrome: &[u8], budget: f64) -> Cluster {
        self.stats.weight_iterations += 1;
        let mut cluster = Cluster::new(syndrome, self.matrix.cols());
        self.weight_1_errors(&mut cluster);
        for tcts in 1..=self.params.max_tcts {
            if cluster.is_resolved() {
                return cluster;
            }
            self.non_dest_branch_growth(tcts, &mut cluster, budget);
        }
        for tcts in 1..=self.params.max_tcts {
            if cluster.is_resolved() {
                return cluster;
            }
            self.dest_branch_growth(tcts, &mut cluster, budget);
            self.weight_1_errors(&mut cluster);
            self.non_dest_branch_growth(1, &mut cluster, budget);
        }
        cluster
    }

    /// Full schedule. `None` when every budget fails.
    pub fn decode(&mut self, syndrome: &[u8]) -> Option<Vec<u8>> {
        if syndrome.iter().all(|&b| b & 1 == 0) {
            return Some(vec![0; self.matrix.cols()]);
        }
        for budget in self.budgets() {
            let cluster = self.run_weight(syndrome, budget);
            if cluster.is_resolved() {
                return Some(cluster.error_dense().to_vec());
            }
        }
        None
    }
}
