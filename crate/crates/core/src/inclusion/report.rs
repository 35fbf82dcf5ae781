/// Outcome of a verification routine: named maximal residuals against a
/// common threshold, plus any hard failures.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    /// Module-qualified operation name, e.g. `inclusion::check_axioms`.
    pub check: &'static str,
    pub passed: bool,
    pub threshold: f64,
    pub residuals: Vec<(String, f64)>,
    pub failures: Vec<String>,
    pub samples: usize,
}

impl CheckReport {
    pub fn new(check: &'static str, threshold: f64) -> Self {
        CheckReport { check, passed: false, threshold, residuals: Vec::new(), failures: Vec::new(), samples: 0 }
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.residuals.push((name.to_string(), value));
    }

    pub fn fail(&mut self, message: String) {
        self.failures.push(message);
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty() && self.residuals.iter().all(|(_, r)| *r <= self.threshold);
        for (name, r) in &self.residuals {
            if !(*r <= self.threshold) {
                self.failures.push(format!("{name} residual {r:.3e} exceeds {:.3e}", self.threshold));
            }
        }
        self
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}
