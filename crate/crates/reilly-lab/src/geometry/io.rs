//! Mesh file format.
//!
//! ```json
//! {
//!   "model": {"c": 0, "N": 3},
//!   "n": 2,
//!   "vertices": [[x, y, z], ...],
//!   "simplices": [[i, j, k], ...],
//!   "analytic": {"name": "...", "H": [...], "S": [...], "params": {...}}
//! }
//! ```
//!
//! Coordinates for `c = -1` are hyperboloid coordinates `(x0, ..., xN)` with
//! `x0` the time coordinate. The `analytic` section is present for corpus
//! meshes and carries per-vertex mean curvature and second-fundamental-form
//! norm along with the shape parameters.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusTag, Shape, SimplicialImmersion, SpaceForm};
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSection {
    pub c: i32,
    #[serde(rename = "N")]
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticSection {
    pub name: String,
    #[serde(rename = "H")]
    pub mean_curvature: Vec<f64>,
    #[serde(rename = "S")]
    pub second_form_norm: Vec<f64>,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub model: ModelSection,
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSection>,
}

impl MeshFile {
    pub fn from_immersion(imm: &SimplicialImmersion, analytic: Option<AnalyticSection>) -> Self {
        let sf = imm.space_form();
        MeshFile {
            model: ModelSection { c: sf.curvature(), dim: sf.dim() },
            n: imm.n(),
            vertices: (0..imm.num_vertices()).map(|i| imm.vertex(i).to_vec()).collect(),
            simplices: (0..imm.num_simplices()).map(|j| imm.simplex(j).to_vec()).collect(),
            analytic,
        }
    }

    /// Validated reconstruction. The corpus tag is recovered when the
    /// analytic section names a known shape.
    pub fn into_immersion(self) -> Result<SimplicialImmersion> {
        let sf = SpaceForm::new(self.model.c, self.model.dim)?;
        let vertices: Vec<f64> = self.vertices.into_iter().flatten().collect();
        let simplices: Vec<usize> = self.simplices.into_iter().flatten().collect();
        let tag = self
            .analytic
            .as_ref()
            .and_then(|a| Shape::from_name_params(&a.name, &a.params))
            .map(|shape| CorpusTag { shape });
        SimplicialImmersion::new(sf, self.n, vertices, simplices, tag)
    }
}

impl Shape {
    /// Inverse of `name()` + `params()`, used when loading mesh files.
    pub fn from_name_params(name: &str, params: &BTreeMap<String, f64>) -> Option<Shape> {
        let get = |k: &str| params.get(k).copied();
        match name {
            "round_sphere" => Some(Shape::RoundSphere {
                radius: get("radius")?,
                ambient: get("ambient")? as usize,
            }),
            "ellipsoid" => Some(Shape::Ellipsoid {
                a: get("a")?,
                b: get("b")?,
                c: get("c")?,
                shift: [
                    get("shift_x").unwrap_or(0.0),
                    get("shift_y").unwrap_or(0.0),
                    get("shift_z").unwrap_or(0.0),
                ],
            }),
            "torus_of_revolution" => Some(Shape::TorusOfRevolution {
                major: get("major")?,
                minor: get("minor")?,
            }),
            "clifford_torus" => Some(Shape::CliffordTorus),
            "geodesic_sphere_S3" => Some(Shape::GeodesicSphereS3 { radius: get("radius")? }),
            "geodesic_sphere_H3" => Some(Shape::GeodesicSphereH3 { radius: get("radius")? }),
            "round_S3_in_R4" => Some(Shape::RoundS3InR4 { radius: get("radius")? }),
            _ => None,
        }
    }

    pub fn params_map(&self) -> BTreeMap<String, f64> {
        self.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

pub fn save_mesh_json(path: &Path, file: &MeshFile) -> Result<()> {
    let json = serde_json::to_string_pretty(file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_mesh_json(path: &Path) -> Result<MeshFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_corpus_immersion;

    #[test]
    fn mesh_roundtrip_preserves_geometry() {
        let shape = Shape::GeodesicSphereH3 { radius: 1.0 };
        let imm = build_corpus_immersion(&shape, 1).unwrap();
        let file = MeshFile::from_immersion(
            &imm,
            Some(AnalyticSection {
                name: shape.name().to_string(),
                mean_curvature: vec![0.0; imm.num_vertices()],
                second_form_norm: vec![0.0; imm.num_vertices()],
                params: shape.params_map(),
            }),
        );
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"model\""));
        assert!(text.contains("\"N\":3"));
        let parsed: MeshFile = serde_json::from_str(&text).unwrap();
        let back = parsed.into_immersion().unwrap();
        assert_eq!(back.num_vertices(), imm.num_vertices());
        assert_eq!(back.vertices_flat(), imm.vertices_flat());
        assert_eq!(back.simplices_flat(), imm.simplices_flat());
        assert_eq!(back.corpus_tag().map(|t| t.shape.clone()), Some(shape));
    }
}
