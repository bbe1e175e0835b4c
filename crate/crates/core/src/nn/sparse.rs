use ndarray::Array2;

/// Real-valued CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), nrows + 1);
        debug_assert_eq!(cols.len(), vals.len());
        Self {
            nrows,
            ncols,
            row_offsets,
            cols,
            vals,
        }
    }

    /// `D^{-1/2} (A + I) D^{-1/2}` for a symmetric adjacency without self-loops,
    /// with `D` the degree matrix of `A + I`.
    pub fn gcn_normalized(num_nodes: usize, row_offsets: &[usize], col_indices: &[usize]) -> Self {
        let inv_sqrt: Vec<f64> = (0..num_nodes)
            .map(|v| 1.0 / ((row_offsets[v + 1] - row_offsets[v] + 1) as f64).sqrt())
            .collect();
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut cols = Vec::with_capacity(col_indices.len() + num_nodes);
        let mut vals = Vec::with_capacity(col_indices.len() + num_nodes);
        offsets.push(0);
        for v in 0..num_nodes {
            let nbrs = &col_indices[row_offsets[v]..row_offsets[v + 1]];
            let mut self_done = false;
            for &u in nbrs {
                if !self_done && u > v {
                    cols.push(v);
                    vals.push(inv_sqrt[v] * inv_sqrt[v]);
                    self_done = true;
                }
                cols.push(u);
                vals.push(inv_sqrt[v] * inv_sqrt[u]);
            }
            if !self_done {
                cols.push(v);
                vals.push(inv_sqrt[v] * inv_sqrt[v]);
            }
            offsets.push(cols.len());
        }
        Self::from_csr(num_nodes, num_nodes, offsets, cols, vals)
    }

    /// Row-mean over neighbors (no self term). Isolated nodes get an empty row.
    pub fn mean_aggregation(
        num_nodes: usize,
        row_offsets: &[usize],
        col_indices: &[usize],
    ) -> Self {
        let mut vals = Vec::with_capacity(col_indices.len());
        for v in 0..num_nodes {
            let deg = row_offsets[v + 1] - row_offsets[v];
            vals.extend(std::iter::repeat_n(1.0 / deg.max(1) as f64, deg));
        }
        Self::from_csr(
            num_nodes,
            num_nodes,
            row_offsets.to_vec(),
            col_indices.to_vec(),
            vals,
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` entries of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// `self * x` for dense `x`.
    pub fn matmul(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.ncols, x.nrows(), "sparse matmul shape mismatch");
        let mut out = Array2::zeros((self.nrows, x.ncols()));
        for r in 0..self.nrows {
            let mut out_row = out.row_mut(r);
            for (c, w) in self.row(r) {
                out_row.scaled_add(w, &x.row(c));
            }
        }
        out
    }

    /// `selfᵀ * x` without materializing the transpose.
    pub fn transpose_matmul(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(
            self.nrows,
            x.nrows(),
            "sparse transpose matmul shape mismatch"
        );
        let mut out = Array2::zeros((self.ncols, x.ncols()));
        for r in 0..self.nrows {
            let x_row = x.row(r);
            for (c, w) in self.row(r) {
                out.row_mut(c).scaled_add(w, &x_row);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for (c, w) in self.row(r) {
                out[[r, c]] += w;
            }
        }
        out
    }
}
