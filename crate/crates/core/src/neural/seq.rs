use serde::{Deserialize, Serialize};

/// A `steps x features` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seq {
    pub steps: usize,
    pub features: usize,
    pub data: Vec<f64>,
}

impl Seq {
    pub fn zeros(steps: usize, features: usize) -> Self {
        Seq {
            steps,
            features,
            data: vec![0.0; steps * features],
        }
    }

    pub fn from_vec(steps: usize, features: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), steps * features, "seq data length");
        Seq { steps, features, data }
    }

    /// A single-row sequence.
    pub fn row_vector(data: Vec<f64>) -> Self {
        Seq {
            steps: 1,
            features: data.len(),
            data,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.steps, self.features)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.features..(t + 1) * self.features]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.features..(t + 1) * self.features]
    }

    pub fn at(&self, t: usize, f: usize) -> f64 {
        self.data[t * self.features + f]
    }

    pub fn add_assign(&mut self, other: &Seq) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}
