use serde::{Deserialize, Serialize};

/// Per-covariate transform used to build a linear design row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Raw,
    Square,
    Abs,
}

impl Transform {
    pub(crate) fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Raw => v,
            Transform::Square => v * v,
            Transform::Abs => v.abs(),
        }
    }
}

/// Design row `[1, t_1(x_1), .., t_m(x_1), t_1(x_2), ..]`: an intercept
/// followed by every transform applied to every covariate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMap {
    transforms: Vec<Transform>,
}

impl FeatureMap {
    pub fn new(transforms: Vec<Transform>) -> Self {
        Self { transforms }
    }

    /// `[1, x]`
    pub fn linear() -> Self {
        Self::new(vec![Transform::Raw])
    }

    /// `[1, x, x²]`
    pub fn quadratic() -> Self {
        Self::new(vec![Transform::Raw, Transform::Square])
    }

    /// `[1, |x|]`
    pub fn absolute() -> Self {
        Self::new(vec![Transform::Abs])
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    pub fn n_features(&self, dim: usize) -> usize {
        1 + dim * self.transforms.len()
    }

    pub fn expand_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.push(1.0);
        for &v in x {
            out.extend(self.transforms.iter().map(|t| t.apply(v)));
        }
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_features(x.len()));
        self.expand_into(x, &mut out);
        out
    }
}

impl Default for FeatureMap {
    fn default() -> Self {
        Self::linear()
    }
}
