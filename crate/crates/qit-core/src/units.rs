use serde::{Deserialize, Serialize};

/// Logarithm base for reported entropies and divergences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Base {
    /// Bits.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl Base {
    /// `log_base(x)`.
    pub fn log(self, x: f64) -> f64 {
        match self {
            Base::Two => x.log2(),
            Base::E => x.ln(),
        }
    }

    /// `base^x`.
    pub fn exp(self, x: f64) -> f64 {
        match self {
            Base::Two => x.exp2(),
            Base::E => x.exp(),
        }
    }

    /// Multiply a value in nats by this to convert it to the base.
    pub fn per_nat(self) -> f64 {
        match self {
            Base::Two => std::f64::consts::LOG2_E,
            Base::E => 1.0,
        }
    }

    /// `log_base(e)`.
    pub fn log_e(self) -> f64 {
        self.per_nat()
    }

    pub fn from_nats(self, x: f64) -> f64 {
        x * self.per_nat()
    }

    pub fn to_nats(self, x: f64) -> f64 {
        x / self.per_nat()
    }

    pub fn name(self) -> &'static str {
        match self {
            Base::Two => "bits",
            Base::E => "nats",
        }
    }
}

impl std::str::FromStr for Base {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "2" => Ok(Base::Two),
            "e" => Ok(Base::E),
            _ => Err(format!("unknown log base '{s}' (expected 2 or e)")),
        }
    }
}
