//! Transportation simplex over a dense `rows x cols` cost grid.
//!
//! The basis is kept as a spanning tree of exactly `rows + cols - 1` cells,
//! degenerate zero-flow cells included. Entering cells follow Dantzig's rule;
//! after a run of degenerate pivots the solver falls back to Bland's rule
//! (lowest-index entering cell, lowest-index leaving cell) until progress
//! resumes, which rules out cycling on tied marginals.

use crate::error::{Error, Result};

const DEGENERATE_RUN_BEFORE_BLAND: usize = 16;

pub(crate) struct SimplexSolution {
    pub flow: Vec<f64>,
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    pub basis: Vec<usize>,
    pub pivots: usize,
}

pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<SimplexSolution> {
    let m = supply.len();
    let n = demand.len();
    debug_assert_eq!(cost.len(), m * n);

    let scale = cost.iter().copied().fold(1.0, f64::max);
    let tol = 1e-11 * scale;
    let max_pivots = 50 * m * n + 100;

    let mut flow = vec![0.0; m * n];
    let mut in_basis = vec![false; m * n];
    let mut basis = north_west_corner(supply, demand, &mut flow);
    for &cell in &basis {
        in_basis[cell] = true;
    }

    let mut tree = Tree::new(m, n);
    let mut pivots = 0;
    let mut degenerate_run = 0;
    loop {
        tree.rebuild(&basis, cost);

        let entering = if degenerate_run < DEGENERATE_RUN_BEFORE_BLAND {
            let mut best: Option<(usize, f64)> = None;
            for cell in 0..m * n {
                if in_basis[cell] {
                    continue;
                }
                let r = tree.reduced_cost(cell, cost);
                if r < -tol && best.is_none_or(|(_, b)| r < b) {
                    best = Some((cell, r));
                }
            }
            best.map(|(c, _)| c)
        } else {
            (0..m * n).find(|&cell| !in_basis[cell] && tree.reduced_cost(cell, cost) < -tol)
        };
        let Some(entering) = entering else {
            break;
        };

        if pivots >= max_pivots {
            return Err(Error::SimplexIterationLimit(max_pivots));
        }
        pivots += 1;

        // Cycle cells after the entering one alternate -, +, -, ... and end on a minus.
        let cycle = tree.cycle_path(entering);
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for &cell in cycle.iter().step_by(2) {
            let f = flow[cell];
            if f < theta || (f == theta && cell < leaving) {
                theta = f;
                leaving = cell;
            }
        }

        for (k, &cell) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                flow[cell] -= theta;
            } else {
                flow[cell] += theta;
            }
        }
        flow[entering] += theta;
        flow[leaving] = 0.0;

        let pos = basis.iter().position(|&c| c == leaving).expect("leaving cell is basic");
        basis[pos] = entering;
        in_basis[leaving] = false;
        in_basis[entering] = true;

        if theta > 0.0 {
            degenerate_run = 0;
        } else {
            degenerate_run += 1;
        }
    }

    Ok(SimplexSolution {
        flow,
        row_potential: tree.potential[..m].to_vec(),
        col_potential: tree.potential[m..].to_vec(),
        basis,
        pivots,
    })
}

fn north_west_corner(supply: &[f64], demand: &[f64], flow: &mut [f64]) -> Vec<usize> {
    let m = supply.len();
    let n = demand.len();
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let mut basis = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].min(b[j]);
        let cell = i * n + j;
        flow[cell] = x;
        basis.push(cell);
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}

/// Spanning tree over `rows + cols` nodes; node `i < rows` is a row, node
/// `rows + j` is column `j`.
struct Tree {
    rows: usize,
    cols: usize,
    adjacency: Vec<Vec<usize>>,
    potential: Vec<f64>,
    parent_cell: Vec<usize>,
    parent_node: Vec<usize>,
    depth: Vec<usize>,
    queue: Vec<usize>,
}

impl Tree {
    fn new(rows: usize, cols: usize) -> Self {
        let nodes = rows + cols;
        Self {
            rows,
            cols,
            adjacency: vec![Vec::new(); nodes],
            potential: vec![0.0; nodes],
            parent_cell: vec![usize::MAX; nodes],
            parent_node: vec![usize::MAX; nodes],
            depth: vec![0; nodes],
            queue: Vec::with_capacity(nodes),
        }
    }

    fn endpoints(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols, self.rows + cell % self.cols)
    }

    /// Recomputes potentials with `u[0] = 0` so that `u_i + v_j = c_ij` on
    /// every basic cell.
    fn rebuild(&mut self, basis: &[usize], cost: &[f64]) {
        for adj in &mut self.adjacency {
            adj.clear();
        }
        for &cell in basis {
            let (r, c) = self.endpoints(cell);
            self.adjacency[r].push(cell);
            self.adjacency[c].push(cell);
        }
        let nodes = self.rows + self.cols;
        let mut seen = vec![false; nodes];
        self.queue.clear();
        self.queue.push(0);
        seen[0] = true;
        self.potential[0] = 0.0;
        self.depth[0] = 0;
        self.parent_cell[0] = usize::MAX;
        self.parent_node[0] = usize::MAX;
        let mut head = 0;
        while head < self.queue.len() {
            let node = self.queue[head];
            head += 1;
            for k in 0..self.adjacency[node].len() {
                let cell = self.adjacency[node][k];
                let (r, c) = self.endpoints(cell);
                let other = if r == node { c } else { r };
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                self.potential[other] = cost[cell] - self.potential[node];
                self.depth[other] = self.depth[node] + 1;
                self.parent_cell[other] = cell;
                self.parent_node[other] = node;
                self.queue.push(other);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis must span all nodes");
    }

    fn reduced_cost(&self, cell: usize, cost: &[f64]) -> f64 {
        let (r, c) = self.endpoints(cell);
        cost[cell] - self.potential[r] - self.potential[c]
    }

    /// Tree path from the entering cell's column to its row.
    fn cycle_path(&self, entering: usize) -> Vec<usize> {
        let (row, col) = self.endpoints(entering);
        let mut from_col = Vec::new();
        let mut from_row = Vec::new();
        let (mut a, mut b) = (col, row);
        while self.depth[a] > self.depth[b] {
            from_col.push(self.parent_cell[a]);
            a = self.parent_node[a];
        }
        while self.depth[b] > self.depth[a] {
            from_row.push(self.parent_cell[b]);
            b = self.parent_node[b];
        }
        while a != b {
            from_col.push(self.parent_cell[a]);
            a = self.parent_node[a];
            from_row.push(self.parent_cell[b]);
            b = self.parent_node[b];
        }
        from_row.reverse();
        from_col.extend(from_row);
        from_col
    }
}
