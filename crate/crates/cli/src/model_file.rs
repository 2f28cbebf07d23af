//! JSON model files.
//!
//! Matrices are lists of rows. The `inclusion` matrix has one column per
//! basis vector of the subalgebra, written in the standard basis of `g`
//! (torus generators first, then `e1, e2, e3` of each `su(2)` factor).

use std::path::Path;

use momap::group::{CompactGroupModel, GroupElement, LieAlgebraBasis};
use momap::momentum::{HamiltonianModel, ModelParts, SubgroupComponent};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MODEL_SCHEMA: &str = "momap-model/1";

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub name: String,
    pub group: GroupSpec,
    pub subgroup: SubgroupSpec,
    pub rep: RepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_forms: Option<Vec<Rows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annihilator: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitting: Option<Rows>,
    /// Id of a built-in Hilbert map whose source is the slice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hilbert: Option<String>,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub torus_rank: usize,
    pub su2_factors: usize,
    /// Representatives of the non-identity components.
    #[serde(default)]
    pub components: Vec<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_product: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    /// `dim g` rows, `dim h` columns.
    pub inclusion: Rows,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub in_group: Rows,
    pub on_rep: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub dim: usize,
    pub omega: Rows,
    /// One matrix per subalgebra basis vector.
    pub generators: Vec<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSpec {
    pub seed: u64,
    pub samples: usize,
    pub grid: f64,
    pub extent: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            seed: 1,
            samples: 100,
            grid: 0.5,
            extent: 1.0,
        }
    }
}

fn matrix(rows: &Rows, nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        let got_cols = rows.first().map(|r| r.len()).unwrap_or(0);
        return Err(CliError::Input(format!(
            "{what}: expected a {nrows}x{ncols} matrix, got {}x{got_cols}",
            rows.len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::Input(format!("{what}: non-finite entry")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn square(rows: &Rows, n: usize, what: &str) -> Result<DMatrix<f64>, CliError> {
    matrix(rows, n, n, what)
}

pub fn to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("model file does not parse: {e}")))?;
        if file.schema != MODEL_SCHEMA {
            return Err(CliError::Input(format!(
                "unsupported model schema {:?}, expected {MODEL_SCHEMA:?}",
                file.schema
            )));
        }
        Ok(file)
    }

    /// Validates the file and builds the model.
    pub fn build(&self) -> Result<HamiltonianModel, CliError> {
        let algebra = LieAlgebraBasis::standard(self.group.torus_rank, self.group.su2_factors)?;
        let ng = algebra.dim();
        let size = algebra.matrix_size();
        let comps = self
            .group
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| square(c, size, &format!("group component {i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let ip = self
            .group
            .inner_product
            .as_ref()
            .map(|b| square(b, ng, "inner product"))
            .transpose()?;
        let group = CompactGroupModel::new(algebra, comps, ip)?;

        if self.subgroup.inclusion.len() != ng {
            return Err(CliError::Input(format!(
                "subgroup inclusion: expected {ng} rows, got {}",
                self.subgroup.inclusion.len()
            )));
        }
        let nh = self.subgroup.inclusion.first().map(|r| r.len()).unwrap_or(0);
        let inclusion = matrix(&self.subgroup.inclusion, ng, nh, "subgroup inclusion")?;
        let d = self.rep.dim;
        let omega = square(&self.rep.omega, d, "omega")?;
        if self.rep.generators.len() != nh {
            return Err(CliError::Input(format!(
                "rep generators: expected {nh}, got {}",
                self.rep.generators.len()
            )));
        }
        let generators = self
            .rep
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| square(g, d, &format!("rep generator {i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let components = self
            .subgroup
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Ok(SubgroupComponent {
                    in_group: GroupElement {
                        matrix: square(&c.in_group, size, &format!("subgroup component {i} in G"))?,
                    },
                    on_rep: square(&c.on_rep, d, &format!("subgroup component {i} on V"))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let momentum_forms = self
            .momentum_forms
            .as_ref()
            .map(|fs| {
                fs.iter()
                    .enumerate()
                    .map(|(i, f)| square(f, d, &format!("momentum form {i}")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let annihilator = self
            .annihilator
            .as_ref()
            .map(|a| matrix(a, ng, ng.saturating_sub(nh), "annihilator"))
            .transpose()?;
        let splitting = self
            .splitting
            .as_ref()
            .map(|s| matrix(s, ng, nh, "splitting"))
            .transpose()?;
        let s = &self.sampling;
        if !(s.grid > 0.0 && s.grid.is_finite() && s.extent > 0.0 && s.extent.is_finite()) {
            return Err(CliError::Input("sampling grid and extent must be positive".into()));
        }
        Ok(HamiltonianModel::new(ModelParts {
            name: self.name.clone(),
            group,
            inclusion,
            omega,
            generators,
            momentum_forms,
            annihilator,
            splitting,
            components,
        })?)
    }

    /// The file describing an existing model.
    pub fn from_model(model: &HamiltonianModel, torus_rank: usize, su2_factors: usize) -> Self {
        let g = model.group();
        let b = g.inner_product();
        let standard_ip = *b == DMatrix::identity(b.nrows(), b.ncols());
        ModelFile {
            schema: MODEL_SCHEMA.into(),
            name: model.name().into(),
            group: GroupSpec {
                torus_rank,
                su2_factors,
                components: g.components().iter().skip(1).map(|c| to_rows(&c.matrix)).collect(),
                inner_product: (!standard_ip).then(|| to_rows(b)),
            },
            subgroup: SubgroupSpec {
                inclusion: to_rows(model.inclusion()),
                components: model
                    .subgroup_components()
                    .iter()
                    .map(|c| ComponentSpec {
                        in_group: to_rows(&c.in_group.matrix),
                        on_rep: to_rows(&c.on_rep),
                    })
                    .collect(),
            },
            rep: RepSpec {
                dim: model.rep_dim(),
                omega: to_rows(model.rep().omega()),
                generators: model.rep().generators().iter().map(to_rows).collect(),
            },
            momentum_forms: None,
            annihilator: None,
            splitting: None,
            hilbert: None,
            sampling: SamplingSpec::default(),
        }
    }
}

/// A validated model together with its file.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub file: ModelFile,
    pub model: HamiltonianModel,
}

pub fn parse_model(text: &str) -> Result<LoadedModel, CliError> {
    let file = ModelFile::parse(text)?;
    let model = file.build()?;
    Ok(LoadedModel { file, model })
}

/// Loads a model from a path, or a bundled fixture when no such file exists
/// and `path` names one.
pub fn load_model(path: &str) -> Result<LoadedModel, CliError> {
    if !Path::new(path).exists() {
        if let Some(text) = fixture(path) {
            return parse_model(text);
        }
    }
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    parse_model(&text)
}

pub const FIXTURES: [(&str, &str); 9] = [
    ("su2su2_circle", include_str!("../examples/su2su2_circle.json")),
    ("torus_weight1", include_str!("../examples/torus_weight1.json")),
    ("torus_weight11", include_str!("../examples/torus_weight11.json")),
    ("torus2_weights", include_str!("../examples/torus2_weights.json")),
    ("su2_adjoint_slice", include_str!("../examples/su2_adjoint_slice.json")),
    ("su2_quaternion", include_str!("../examples/su2_quaternion.json")),
    ("z2_extension", include_str!("../examples/z2_extension.json")),
    ("o2_cotangent", include_str!("../examples/o2_cotangent.json")),
    ("corrupted_omega", include_str!("../examples/corrupted_omega.json")),
];

/// Text of a bundled fixture, by name with or without `.json` and an
/// `examples/` prefix.
pub fn fixture(name: &str) -> Option<&'static str> {
    let key = name
        .trim_start_matches("examples/")
        .trim_end_matches(".json");
    FIXTURES.iter().find(|(n, _)| *n == key).map(|(_, t)| *t)
}
