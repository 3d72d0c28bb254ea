//! JSON robot description documents.
//!
//! ```json
//! { "name": "arm", "gravity": [0, 0, -9.81],
//!   "joints": [{"type": "revolute", "axis": [0, 0, 1], "origin": [0, 0, 0]}],
//!   "bodies": [{"mass": 1, "com": [0.5, 0, 0], "inertia": [0, 0.08, 0.08, 0, 0, 0]}],
//!   "ee_home": {"position": [1, 0, 0]} }
//! ```
//!
//! `inertia` is either `[Ixx, Iyy, Izz, Ixy, Ixz, Iyz]` or nine row-major
//! entries. `gravity`, `com_rotation`, `ee_home.rotation` and the origin of a
//! prismatic joint are optional. Unknown keys are rejected.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use screwchain::model::GRAVITY_3D;
use screwchain::{BodySpec, JointKind, JointSpec, RobotModel, Transform};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DescriptionError {
    /// Malformed JSON or a schema violation.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    /// Well-formed document describing an invalid robot.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl DescriptionError {
    /// Dotted path of the offending field, e.g. `bodies[2].mass`.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            Self::Schema { path, .. } | Self::Invalid { path, .. } => Some(path),
            Self::Io(_) => None,
        }
    }

    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDescription {
    #[serde(rename = "type")]
    pub kind: JointType,
    pub axis: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDescription {
    pub mass: f64,
    pub com: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub com_rotation: Option<[f64; 9]>,
    pub inertia: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EeDescription {
    pub position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[f64; 9]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDescription {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<[f64; 3]>,
    pub joints: Vec<JointDescription>,
    pub bodies: Vec<BodyDescription>,
    pub ee_home: EeDescription,
}

fn rotation_from_rows(r: &[f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(r)
}

fn rows_of(r: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for (i, v) in out.iter_mut().enumerate() {
        *v = r[(i / 3, i % 3)];
    }
    out
}

fn inertia_matrix(values: &[f64], index: usize) -> Result<Matrix3<f64>, DescriptionError> {
    match *values {
        [ixx, iyy, izz, ixy, ixz, iyz] => Ok(Matrix3::new(
            ixx, ixy, ixz, //
            ixy, iyy, iyz, //
            ixz, iyz, izz,
        )),
        _ if values.len() == 9 => Ok(Matrix3::from_row_slice(values)),
        _ => Err(DescriptionError::invalid(
            format!("bodies[{index}].inertia"),
            format!("expected 6 or 9 entries, got {}", values.len()),
        )),
    }
}

impl RobotDescription {
    pub fn to_model(&self) -> Result<RobotModel, DescriptionError> {
        let joints = self
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| {
                let axis = Vector3::from(j.axis);
                match (j.kind, j.origin) {
                    (JointType::Revolute, Some(o)) => Ok(JointSpec::revolute(axis, Vector3::from(o))),
                    (JointType::Revolute, None) => Err(DescriptionError::invalid(
                        format!("joints[{i}].origin"),
                        "revolute joints need an origin",
                    )),
                    (JointType::Prismatic, _) => Ok(JointSpec::prismatic(axis)),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let bodies = self
            .bodies
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let rotation = b
                    .com_rotation
                    .as_ref()
                    .map_or_else(Matrix3::identity, rotation_from_rows);
                Ok(BodySpec {
                    mass: b.mass,
                    com_home: Transform::new(rotation, Vector3::from(b.com)),
                    inertia: inertia_matrix(&b.inertia, i)?,
                })
            })
            .collect::<Result<Vec<_>, DescriptionError>>()?;
        let ee_rotation = self
            .ee_home
            .rotation
            .as_ref()
            .map_or_else(Matrix3::identity, rotation_from_rows);
        let ee_home = Transform::new(ee_rotation, Vector3::from(self.ee_home.position));
        let gravity = self.gravity.map_or(GRAVITY_3D, Vector3::from);
        RobotModel::new(self.name.clone(), joints, bodies, ee_home, gravity).map_err(|e| match e {
            screwchain::Error::Validation { field, message } => {
                DescriptionError::Invalid { path: field, message }
            }
            other => DescriptionError::invalid("", other.to_string()),
        })
    }

    pub fn from_model(model: &RobotModel) -> Self {
        let joints = model
            .joints()
            .iter()
            .map(|j| match j.kind {
                JointKind::Revolute => JointDescription {
                    kind: JointType::Revolute,
                    axis: j.axis.into(),
                    origin: Some(j.origin.into()),
                },
                JointKind::Prismatic => JointDescription {
                    kind: JointType::Prismatic,
                    axis: j.axis.into(),
                    origin: None,
                },
            })
            .collect();
        let bodies = model
            .bodies()
            .iter()
            .map(|b| {
                let i = &b.inertia;
                let inertia = if *i == i.transpose() {
                    vec![i[(0, 0)], i[(1, 1)], i[(2, 2)], i[(0, 1)], i[(0, 2)], i[(1, 2)]]
                } else {
                    rows_of(i).to_vec()
                };
                BodyDescription {
                    mass: b.mass,
                    com: b.com_home.translation.into(),
                    com_rotation: (b.com_home.rotation != Matrix3::identity())
                        .then(|| rows_of(&b.com_home.rotation)),
                    inertia,
                }
            })
            .collect();
        let ee = model.ee_home();
        Self {
            name: model.name().to_string(),
            gravity: Some((*model.gravity()).into()),
            joints,
            bodies,
            ee_home: EeDescription {
                position: ee.translation.into(),
                rotation: (ee.rotation != Matrix3::identity()).then(|| rows_of(&ee.rotation)),
            },
        }
    }
}

/// Parses without building a model; schema errors carry the field path.
pub fn parse_description(text: &str) -> Result<RobotDescription, DescriptionError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        DescriptionError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn load_robot(text: &str) -> Result<RobotModel, DescriptionError> {
    parse_description(text)?.to_model()
}

pub fn load_robot_file(path: impl AsRef<Path>) -> Result<RobotModel, DescriptionError> {
    load_robot(&std::fs::read_to_string(path)?)
}

/// Pretty-printed description document.
pub fn save_robot(model: &RobotModel) -> String {
    let mut text = serde_json::to_string_pretty(&RobotDescription::from_model(model))
        .expect("descriptions always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use screwchain::model::make_revolute_twist;
    use screwchain::robots::{make_cartpole, make_franka, make_snake};

    const MINIMAL: &str = r#"{
        "name": "one",
        "joints": [{"type": "revolute", "axis": [0, 0, 1], "origin": [1, 0, 0]}],
        "bodies": [{"mass": 1, "com": [1.5, 0, 0], "inertia": [0, 0.08, 0.08, 0, 0, 0]}],
        "ee_home": {"position": [2, 0, 0]}
    }"#;

    #[test]
    fn minimal_document() {
        let m = load_robot(MINIMAL).unwrap();
        assert_eq!(m.dof(), 1);
        assert_eq!(
            m.joint_twists()[0],
            make_revolute_twist(&Vector3::z(), &Vector3::x()).unwrap()
        );
        assert_eq!(*m.gravity(), GRAVITY_3D);
    }

    #[test]
    fn zoo_round_trips() {
        let zoo = [
            make_snake(2, 1.0, 1.0).unwrap(),
            make_snake(7, 0.4, 2.5).unwrap(),
            make_cartpole(1.0, 0.3, 0.9).unwrap(),
            make_franka(),
        ];
        for model in zoo {
            let back = load_robot(&save_robot(&model)).unwrap();
            assert_eq!(back, model);
        }
    }

    #[test]
    fn rotations_and_full_inertia_round_trip() {
        let doc = r#"{
            "name": "tilted",
            "gravity": [0, -9.81, 0],
            "joints": [{"type": "prismatic", "axis": [1, 0, 0]}],
            "bodies": [{"mass": 2, "com": [0, 0, 0], "com_rotation": [0, -1, 0, 1, 0, 0, 0, 0, 1],
                        "inertia": [1, 0.1, 0, 0.1, 1, 0, 0, 0, 1.5]}],
            "ee_home": {"position": [0, 0, 1], "rotation": [1, 0, 0, 0, 0, -1, 0, 1, 0]}
        }"#;
        let m = load_robot(doc).unwrap();
        assert_eq!(m.bodies()[0].inertia[(0, 1)], 0.1);
        assert_eq!(m.ee_home().rotation[(1, 2)], -1.0);
        assert_eq!(load_robot(&save_robot(&m)).unwrap(), m);
    }

    fn error_path(doc: &str) -> String {
        load_robot(doc).unwrap_err().field_path().unwrap().to_string()
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(
            error_path(&MINIMAL.replace("\"mass\": 1", "\"mass\": -1")),
            "bodies[0].mass"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("[0, 0, 1]", "[0, 0, 2]")),
            "joints[0].axis"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("[0, 0, 1]", "[0, 1]")),
            "joints[0].axis"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("[0, 0.08, 0.08, 0, 0, 0]", "[1, 0, 0, 0.5, 1, 0, 0, 0, 1]")),
            "bodies[0].inertia"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("[0, 0.08, 0.08, 0, 0, 0]", "[1, 1]")),
            "bodies[0].inertia"
        );
        let unknown = MINIMAL.replace("\"mass\": 1", "\"mass\": 1, \"colour\": \"red\"");
        let err = load_robot(&unknown).unwrap_err();
        assert_eq!(err.field_path(), Some("bodies[0].colour"));
        assert!(err.to_string().contains("colour"));
        assert_eq!(
            error_path(&MINIMAL.replace(", \"origin\": [1, 0, 0]", "")),
            "joints[0].origin"
        );
        assert!(load_robot("{").is_err());
    }
}
