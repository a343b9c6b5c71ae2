//! Versioned on-disk formats for joints, scenarios and report profiles.
//!
//! Floats are written in shortest round-trip form, so a value read back is
//! bit-identical to the value written. Non-finite payments are written as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use serde::{Deserialize, Serialize};

use crate::agents::{ReportMatrix, Scenario};
use crate::error::{Error, Result};
use crate::mechanisms::BtsReportProfile;
use crate::prob::JointDistribution;

/// Version written into every file this crate produces.
pub const SCHEMA_VERSION: u32 = 1;

fn check_version(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!("unsupported schema_version {found}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// A pairwise joint (`[[..]]`) or conditional tensor (`[[[..]]]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFile {
    pub schema_version: u32,
    pub joint: JointDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl JointFile {
    pub fn new(joint: JointDistribution) -> Self {
        JointFile { schema_version: SCHEMA_VERSION, joint, labels: None }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, SchemaError> {
        let file: JointFile = serde_json::from_str(text).map_err(SchemaError::from)?;
        check_version(file.schema_version).map_err(SchemaError::Invalid)?;
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub scenario: Scenario,
}

impl ScenarioFile {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioFile { schema_version: SCHEMA_VERSION, scenario }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, SchemaError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(SchemaError::from)?;
        check_version(file.schema_version).map_err(SchemaError::Invalid)?;
        file.scenario.validate().map_err(SchemaError::Invalid)?;
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub reports: ReportMatrix,
}

impl ReportFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, SchemaError> {
        let file: ReportFile = serde_json::from_str(text).map_err(SchemaError::from)?;
        check_version(file.schema_version).map_err(SchemaError::Invalid)?;
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BtsProfileFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub profile: BtsReportProfile,
}

impl BtsProfileFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, SchemaError> {
        let file: BtsProfileFile = serde_json::from_str(text).map_err(SchemaError::from)?;
        check_version(file.schema_version).map_err(SchemaError::Invalid)?;
        file.profile.validate().map_err(SchemaError::Invalid)?;
        Ok(file)
    }
}

/// A file that failed to load, with the position of a syntax error when known.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid content: {0}")]
    Invalid(Error),
}

impl From<serde_json::Error> for SchemaError {
    fn from(e: serde_json::Error) -> Self {
        SchemaError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

/// Serde adapter for `f64` that tolerates non-finite values.
pub mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

/// [`float`] for optional values.
pub mod opt_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::float::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::float")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Prior, Strategy};

    #[test]
    fn joint_file_round_trip() {
        let j = JointDistribution::pairwise(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let text = serde_json::to_string(&JointFile::new(j.clone())).unwrap();
        assert!(text.contains("\"schema_version\":1"));
        assert_eq!(JointFile::from_json(&text).unwrap().joint, j);
    }

    #[test]
    fn full_precision_survives() {
        let x = 0.1f64 + 0.2;
        let j = JointDistribution::pairwise(vec![vec![x / 2.0, 0.5 - x / 2.0], vec![0.25, 0.25]]).unwrap();
        let text = serde_json::to_string(&JointFile::new(j.clone())).unwrap();
        let back = JointFile::from_json(&text).unwrap().joint;
        assert_eq!(
            back.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            j.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn malformed_files_report_position() {
        match JointFile::from_json("{\"schema_version\": 1,\n \"joint\": [[0.5, 0.5]") {
            Err(SchemaError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            JointFile::from_json("{\"schema_version\": 9, \"joint\": [[0.5, 0.5]]}"),
            Err(SchemaError::Invalid(_))
        ));
    }

    #[test]
    fn scenario_file_round_trip() {
        let prior =
            Prior::symmetric(JointDistribution::pairwise(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()).unwrap();
        let scenario =
            Scenario::new(prior, vec![Strategy::truthful(2), Strategy::permutation(&[1, 0]).unwrap()], None).unwrap();
        let text = serde_json::to_string_pretty(&ScenarioFile::new(scenario.clone())).unwrap();
        assert_eq!(ScenarioFile::from_json(&text).unwrap().scenario, scenario);
    }

    #[test]
    fn float_adapter_handles_infinity() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W(#[serde(with = "float")] f64);
        assert_eq!(serde_json::to_string(&W(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<W>("\"inf\"").unwrap(), W(f64::INFINITY));
        assert_eq!(serde_json::from_str::<W>("0.5").unwrap(), W(0.5));
    }
}
