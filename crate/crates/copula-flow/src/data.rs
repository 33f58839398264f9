/// A set of `n` points in `R^dim`, stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    data: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert_eq!(data.len() % dim, 0, "data length must be a multiple of dim");
        Self { dim, data }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * n),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// All values of one coordinate, in row order.
    pub fn column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.dim);
        self.data.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
