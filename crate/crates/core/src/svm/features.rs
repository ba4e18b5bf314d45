use crate::bow::SparseDocVector;

/// Row access the solver needs, shared by dense embeddings and sparse
/// TF-IDF documents.
pub trait FeatureRow: Sync {
    fn dimension(&self) -> usize;
    fn dot(&self, w: &[f64]) -> f64;
    /// `w += scale * self`
    fn add_scaled(&self, scale: f64, w: &mut [f64]);
    fn squared_norm(&self) -> f64;
    fn all_finite(&self) -> bool;
}

impl FeatureRow for [f64] {
    fn dimension(&self) -> usize {
        self.len()
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.iter().zip(w).map(|(x, w)| x * w).sum()
    }

    fn add_scaled(&self, scale: f64, w: &mut [f64]) {
        for (w, x) in w.iter_mut().zip(self) {
            *w += scale * x;
        }
    }

    fn squared_norm(&self) -> f64 {
        self.iter().map(|x| x * x).sum()
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl FeatureRow for Vec<f64> {
    fn dimension(&self) -> usize {
        self.len()
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.as_slice().dot(w)
    }

    fn add_scaled(&self, scale: f64, w: &mut [f64]) {
        self.as_slice().add_scaled(scale, w)
    }

    fn squared_norm(&self) -> f64 {
        self.as_slice().squared_norm()
    }

    fn all_finite(&self) -> bool {
        self.as_slice().all_finite()
    }
}

impl FeatureRow for SparseDocVector {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, x)| x * w[i]).sum()
    }

    fn add_scaled(&self, scale: f64, w: &mut [f64]) {
        for &(i, x) in &self.entries {
            w[i] += scale * x;
        }
    }

    fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|(_, x)| x * x).sum()
    }

    fn all_finite(&self) -> bool {
        self.entries.iter().all(|(_, x)| x.is_finite())
    }
}

impl<T: FeatureRow + ?Sized> FeatureRow for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn dot(&self, w: &[f64]) -> f64 {
        (**self).dot(w)
    }

    fn add_scaled(&self, scale: f64, w: &mut [f64]) {
        (**self).add_scaled(scale, w)
    }

    fn squared_norm(&self) -> f64 {
        (**self).squared_norm()
    }

    fn all_finite(&self) -> bool {
        (**self).all_finite()
    }
}
