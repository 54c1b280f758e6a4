use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::VariableSpec;
use crate::error::{Error, Result};

/// Identifier for every effect measure the toolkit computes, by formula or
/// by the counterfactual oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "TE")]
    Te,
    #[serde(rename = "DE")]
    De,
    #[serde(rename = "IE")]
    Ie,
    #[serde(rename = "NDE")]
    Nde,
    #[serde(rename = "NIE")]
    Nie,
    #[serde(rename = "TDE")]
    Tde,
    #[serde(rename = "TIE")]
    Tie,
    #[serde(rename = "CDE")]
    Cde,
    #[serde(rename = "PIIE")]
    Piie,
    #[serde(rename = "TE_XZ")]
    TeXz,
    #[serde(rename = "TE_ZY")]
    TeZy,
    #[serde(rename = "DE_TRUE")]
    DeTrue,
    #[serde(rename = "IE_TRUE")]
    IeTrue,
    /// E[Y_x - Y_x̄ | X = x̄].
    #[serde(rename = "ETT_UNTREATED")]
    EttUntreated,
    /// TE - DE - IE.
    #[serde(rename = "RESIDUAL")]
    Residual,
}

impl Measure {
    pub const ALL: [Measure; 15] = [
        Measure::Te,
        Measure::De,
        Measure::Ie,
        Measure::Nde,
        Measure::Nie,
        Measure::Tde,
        Measure::Tie,
        Measure::Cde,
        Measure::Piie,
        Measure::TeXz,
        Measure::TeZy,
        Measure::DeTrue,
        Measure::IeTrue,
        Measure::EttUntreated,
        Measure::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Te => "TE",
            Measure::De => "DE",
            Measure::Ie => "IE",
            Measure::Nde => "NDE",
            Measure::Nie => "NIE",
            Measure::Tde => "TDE",
            Measure::Tie => "TIE",
            Measure::Cde => "CDE",
            Measure::Piie => "PIIE",
            Measure::TeXz => "TE_XZ",
            Measure::TeZy => "TE_ZY",
            Measure::DeTrue => "DE_TRUE",
            Measure::IeTrue => "IE_TRUE",
            Measure::EttUntreated => "ETT_UNTREATED",
            Measure::Residual => "RESIDUAL",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == upper || (upper == "ETT" && *m == Measure::EttUntreated))
            .ok_or_else(|| Error::UnsupportedMeasure(s.to_string()))
    }
}

/// A binary contrast on one variable: the treated level against the
/// reference level (x against x̄).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contrast {
    pub variable: String,
    pub treated: String,
    pub reference: String,
}

impl Contrast {
    pub fn new(
        variable: impl Into<String>,
        treated: impl Into<String>,
        reference: impl Into<String>,
    ) -> Self {
        Contrast { variable: variable.into(), treated: treated.into(), reference: reference.into() }
    }

    /// Treated level last, reference first: the default reading of a binary
    /// variable's declared order.
    pub fn from_binary(spec: &VariableSpec) -> Result<Self> {
        if !spec.is_binary() {
            return Err(Error::Usage(format!("`{}` is not binary; give an explicit contrast", spec.name)));
        }
        Ok(Contrast::new(&spec.name, &spec.levels[1], &spec.levels[0]))
    }

    pub fn swapped(&self) -> Self {
        Contrast::new(&self.variable, &self.reference, &self.treated)
    }

    /// Level indices `(treated, reference)` in `spec`, which must be binary.
    pub(crate) fn indices(&self, spec: &VariableSpec) -> Result<(usize, usize)> {
        let t = spec.require_level(&self.treated)?;
        let r = spec.require_level(&self.reference)?;
        if t == r {
            return Err(Error::Usage(format!("contrast on `{}` uses the same level twice", self.variable)));
        }
        Ok((t, r))
    }
}

impl fmt::Display for Contrast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}/{}", self.variable, self.treated, self.reference)
    }
}

impl FromStr for Contrast {
    type Err = Error;

    /// Parses `X=x1/x0` (treated `x1`, reference `x0`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("expected VAR=treated/reference, got `{s}`"));
        let (var, levels) = s.split_once('=').ok_or_else(bad)?;
        let (t, r) = levels.split_once('/').ok_or_else(bad)?;
        let (var, t, r) = (var.trim(), t.trim(), r.trim());
        if var.is_empty() || t.is_empty() || r.is_empty() {
            return Err(bad());
        }
        Ok(Contrast::new(var, t, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contrast_syntax() {
        let c: Contrast = "X=x1/x0".parse().unwrap();
        assert_eq!(c, Contrast::new("X", "x1", "x0"));
        assert_eq!(c.to_string(), "X=x1/x0");
        assert!("X=x1".parse::<Contrast>().is_err());
        assert!("x1/x0".parse::<Contrast>().is_err());
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert_eq!("nde".parse::<Measure>().unwrap(), Measure::Nde);
        assert_eq!("ETT".parse::<Measure>().unwrap(), Measure::EttUntreated);
        assert!("ATE".parse::<Measure>().is_err());
    }
}
