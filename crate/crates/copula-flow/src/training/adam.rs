//! Adam with bias correction, at the framework-default hyperparameters:
//! step size 1e-3, decays 0.9/0.999, epsilon 1e-8.

/// Optimizer state; one slot per parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self::with_hyper(n_params, 1e-3, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(
        n_params: usize,
        step_size: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Self {
        Self {
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step_size,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update, in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count mismatch");
        assert_eq!(grad.len(), self.m.len(), "gradient length mismatch");
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.step_size * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}
