//! Rectangular linear assignment with forbidden pairs.
//!
//! The matching maximizes the number of admissible pairs first and then
//! minimizes their total cost. Without forbidden entries this is the usual
//! minimum-cost assignment of `min(rows, cols)` pairs.

/// Dense row-major cost matrix; `None` marks a forbidden pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Option<f64>>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        CostMatrix { rows, cols, entries: vec![None; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        CostMatrix { rows: rows.len(), cols, entries: rows.concat() }
    }

    pub fn from_values(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Option<f64>>> =
            rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Option<f64>) {
        self.entries[r * self.cols + c] = v;
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl Assignment {
    pub fn total_cost(&self, m: &CostMatrix) -> f64 {
        self.matches.iter().map(|&(r, c)| m.get(r, c).unwrap()).sum()
    }

    pub fn col_for_row(&self, row: usize) -> Option<usize> {
        self.matches.iter().find(|(r, _)| *r == row).map(|(_, c)| *c)
    }
}

/// Solve the assignment problem (Hungarian method with potentials, O(n³)).
pub fn assign(m: &CostMatrix) -> Assignment {
    let n = m.rows.max(m.cols);
    if m.rows == 0 || m.cols == 0 {
        return Assignment {
            matches: Vec::new(),
            unmatched_rows: (0..m.rows).collect(),
            unmatched_cols: (0..m.cols).collect(),
        };
    }

    // Shift admissible costs to be non-negative and price every forbidden or
    // padding cell above any achievable admissible total, so that fewer
    // inadmissible cells always wins.
    let admissible = m.entries.iter().flatten();
    let lo = admissible.clone().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = admissible.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let span = if lo.is_finite() { hi - lo } else { 0.0 };
    let big = n as f64 * (span + 1.0) + 1.0;
    let cost = |r: usize, c: usize| -> f64 {
        if r < m.rows && c < m.cols {
            m.get(r, c).map_or(big, |v| v - lo)
        } else {
            big
        }
    };

    // 1-based arrays; row_of[c] is the row assigned to column c.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut matches = Vec::new();
    for j in 1..=n {
        let (r, c) = (row_of[j] - 1, j - 1);
        if r < m.rows && c < m.cols && m.get(r, c).is_some() {
            matches.push((r, c));
        }
    }
    matches.sort_unstable();
    let unmatched_rows = (0..m.rows).filter(|r| !matches.iter().any(|(mr, _)| mr == r)).collect();
    let unmatched_cols = (0..m.cols).filter(|c| !matches.iter().any(|(_, mc)| mc == c)).collect();
    Assignment { matches, unmatched_rows, unmatched_cols }
}
