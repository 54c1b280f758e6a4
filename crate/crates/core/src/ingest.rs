//! File formats: distributions and structural models as JSON, observation
//! records as CSV, and maximum-likelihood (optionally smoothed) estimation of
//! a joint from records.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::Conditionals;
use crate::dist::{decode, encode, Assignment, Factor, FiniteDistribution, VariableSpec};
use crate::error::{Error, Result};
use crate::measure::Contrast;
use crate::scm::StructuralModel;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    variables: Vec<VariableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint: Option<Vec<JointCell>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<FactorEntry>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointCell {
    assign: Assignment,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorEntry {
    target: String,
    #[serde(default)]
    given: Vec<String>,
    table: Vec<FactorRow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorRow {
    #[serde(default)]
    given: Assignment,
    probs: BTreeMap<String, f64>,
}

/// A distribution file before any joint is assembled.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionDocument {
    Joint(FiniteDistribution),
    Factored { variables: Vec<VariableSpec>, factors: Vec<Factor> },
}

fn parse_error(origin: &str, message: impl Into<String>) -> Error {
    Error::Parse { path: origin.to_string(), message: message.into() }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| parse_error(&path.display().to_string(), e.to_string()))
}

fn convert_factor(origin: &str, i: usize, entry: FactorEntry, vars: &[VariableSpec]) -> Result<Factor> {
    let field = |rest: &str| format!("factors[{i}]{rest}");
    let spec = vars.iter().find(|v| v.name == entry.target).ok_or_else(|| {
        parse_error(origin, format!("{}: unknown variable `{}`", field(".target"), entry.target))
    })?;
    let mut rows = Vec::with_capacity(entry.table.len());
    for (j, row) in entry.table.into_iter().enumerate() {
        let here = field(&format!(".table[{j}].probs"));
        if let Some(level) = row.probs.keys().find(|l| spec.level_index(l).is_none()) {
            return Err(parse_error(origin, format!("{here}: `{level}` is not a level of `{}`", spec.name)));
        }
        let probs = spec
            .levels
            .iter()
            .map(|l| {
                row.probs
                    .get(l)
                    .copied()
                    .ok_or_else(|| parse_error(origin, format!("{here}: no probability for level `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((row.given, probs));
    }
    Ok(Factor::conditional(entry.target, entry.given, rows))
}

/// Parses distribution JSON; `origin` labels errors.
pub fn parse_document(text: &str, origin: &str) -> Result<DistributionDocument> {
    let file: DistributionFile =
        serde_json::from_str(text).map_err(|e| parse_error(origin, e.to_string()))?;
    match (file.joint, file.factors) {
        (Some(cells), None) => {
            let dist =
                FiniteDistribution::from_cells(file.variables, cells.into_iter().map(|c| (c.assign, c.p)))?;
            Ok(DistributionDocument::Joint(dist))
        }
        (None, Some(entries)) => {
            let factors = entries
                .into_iter()
                .enumerate()
                .map(|(i, e)| convert_factor(origin, i, e, &file.variables))
                .collect::<Result<Vec<_>>>()?;
            Ok(DistributionDocument::Factored { variables: file.variables, factors })
        }
        _ => Err(parse_error(origin, "expected exactly one of `joint` or `factors`")),
    }
}

pub fn parse_distribution(text: &str, origin: &str) -> Result<FiniteDistribution> {
    match parse_document(text, origin)? {
        DistributionDocument::Joint(d) => Ok(d),
        DistributionDocument::Factored { variables, factors } => {
            FiniteDistribution::from_factors(variables, &factors)
        }
    }
}

/// Loads a joint or factored distribution file as a validated joint.
pub fn load_distribution(path: impl AsRef<Path>) -> Result<FiniteDistribution> {
    let path = path.as_ref();
    parse_distribution(&read_text(path)?, &path.display().to_string())
}

fn factor_row<'a>(factor: &'a Factor, given: &Assignment) -> Result<&'a [f64]> {
    factor.rows.iter().find(|(a, _)| a == given).map(|(_, p)| p.as_slice()).ok_or_else(|| {
        Error::InvalidFactor { target: factor.target.clone(), reason: format!("no row for {given}") }
    })
}

/// p(Z|X) and p(Y|X,Z) from a factored file (p(X) may be absent) or from a
/// joint file.
pub fn parse_conditionals(
    text: &str,
    origin: &str,
    exposure: &Contrast,
    mediator: &str,
    outcome: &str,
) -> Result<Conditionals> {
    let (variables, factors) = match parse_document(text, origin)? {
        DistributionDocument::Joint(d) => {
            let req = crate::effects::MeasureRequest::new(exposure.clone(), mediator, outcome);
            return Conditionals::from_joint(&d, &req);
        }
        DistributionDocument::Factored { variables, factors } => (variables, factors),
    };
    let spec = |name: &str| {
        variables
            .iter()
            .find(|v| v.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };
    let (xs, zs, ys) = (spec(&exposure.variable)?, spec(mediator)?, spec(outcome)?);
    let find = |target: &str, given: &[&str]| {
        factors
            .iter()
            .find(|f| {
                f.target == target
                    && f.given.len() == given.len()
                    && given.iter().all(|g| f.given.iter().any(|h| h == g))
            })
            .ok_or_else(|| Error::MissingFactor(format!("{target}|{}", given.join(","))))
    };
    let fz = find(mediator, &[&xs.name])?;
    let fy = find(outcome, &[&xs.name, &zs.name])?;
    let mut mediator_rows = Vec::new();
    let mut outcome_rows = Vec::new();
    for x in &xs.levels {
        let at_x = Assignment::new().with(&xs.name, x);
        mediator_rows.push(factor_row(fz, &at_x)?.to_vec());
        for z in &zs.levels {
            outcome_rows.push(factor_row(fy, &at_x.clone().with(&zs.name, z))?.to_vec());
        }
    }
    Conditionals::new(xs, zs, ys, exposure.clone(), mediator_rows, outcome_rows)
}

pub fn load_conditionals(
    path: impl AsRef<Path>,
    exposure: &Contrast,
    mediator: &str,
    outcome: &str,
) -> Result<Conditionals> {
    let path = path.as_ref();
    parse_conditionals(&read_text(path)?, &path.display().to_string(), exposure, mediator, outcome)
}

/// Joint-form JSON with every cell listed, probabilities at full precision.
pub fn distribution_to_json(dist: &FiniteDistribution) -> Result<String> {
    let file = DistributionFile {
        variables: dist.variables().to_vec(),
        joint: Some(dist.assignments().map(|(assign, p)| JointCell { assign, p }).collect()),
        factors: None,
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn write_distribution(dist: &FiniteDistribution, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, distribution_to_json(dist)?)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmFile {
    exogenous: Vec<ExogenousEntry>,
    endogenous: Vec<EndogenousEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_budget: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExogenousEntry {
    name: String,
    levels: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndogenousEntry {
    name: String,
    /// Inferred from mechanism outputs in order of first appearance when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default)]
    parents: Vec<String>,
    mechanism: Vec<MechanismRow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MechanismRow {
    #[serde(default)]
    parents: Assignment,
    value: String,
}

pub fn parse_scm(text: &str, origin: &str) -> Result<StructuralModel> {
    let file: ScmFile = serde_json::from_str(text).map_err(|e| parse_error(origin, e.to_string()))?;
    let mut builder = StructuralModel::builder();
    for e in file.exogenous {
        builder = builder.exogenous(VariableSpec::new(e.name, e.levels), e.probs);
    }
    for e in file.endogenous {
        let levels = e.levels.unwrap_or_else(|| {
            let mut seen: Vec<String> = Vec::new();
            for row in &e.mechanism {
                if !seen.contains(&row.value) {
                    seen.push(row.value.clone());
                }
            }
            seen
        });
        let mut spec = VariableSpec::new(e.name, levels);
        spec.values = e.values;
        let entries = e.mechanism.into_iter().map(|r| (r.parents, r.value)).collect();
        builder = builder.endogenous_entries(spec, e.parents, entries);
    }
    if let Some(budget) = file.state_budget {
        builder = builder.state_budget(budget);
    }
    builder.build()
}

pub fn load_scm(path: impl AsRef<Path>) -> Result<StructuralModel> {
    let path = path.as_ref();
    parse_scm(&read_text(path)?, &path.display().to_string())
}

pub fn scm_to_json(model: &StructuralModel) -> Result<String> {
    let exogenous = model
        .exogenous()
        .iter()
        .map(|e| ExogenousEntry {
            name: e.spec.name.clone(),
            levels: e.spec.levels.clone(),
            probs: e.probs.clone(),
        })
        .collect();
    let mut endogenous = Vec::new();
    for v in model.endogenous() {
        let pspecs = v.parents.iter().map(|p| model.spec(p)).collect::<Result<Vec<_>>>()?;
        let cards: Vec<usize> = pspecs.iter().map(|s| s.cardinality()).collect();
        let mut levels = vec![0; cards.len()];
        let mechanism = v
            .table
            .iter()
            .enumerate()
            .map(|(i, &out)| {
                decode(i, &cards, &mut levels);
                MechanismRow {
                    parents: pspecs
                        .iter()
                        .zip(&levels)
                        .map(|(s, &l)| (s.name.clone(), s.levels[l].clone()))
                        .collect(),
                    value: v.spec.levels[out].clone(),
                }
            })
            .collect();
        endogenous.push(EndogenousEntry {
            name: v.spec.name.clone(),
            levels: Some(v.spec.levels.clone()),
            values: v.spec.values.clone(),
            parents: v.parents.clone(),
            mechanism,
        });
    }
    let budget = model.state_budget();
    let file = ScmFile {
        exogenous,
        endogenous,
        state_budget: (budget != crate::scm::DEFAULT_STATE_BUDGET).then_some(budget),
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn write_scm(model: &StructuralModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, scm_to_json(model)?)?;
    Ok(())
}

/// Observations over a fixed schema, stored as level indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBatch {
    pub schema: Vec<VariableSpec>,
    pub rows: Vec<Vec<usize>>,
    /// Multiplicity of each row; `None` means one each.
    pub counts: Option<Vec<u64>>,
}

impl RecordBatch {
    pub fn new(schema: Vec<VariableSpec>, rows: Vec<Vec<usize>>, counts: Option<Vec<u64>>) -> Result<Self> {
        if let Some(v) = crate::dist::validate(&schema, &[]).into_iter().find(|v| {
            !matches!(v, crate::dist::Violation::Mass(_) | crate::dist::Violation::CellCount { .. })
        }) {
            return Err(Error::Usage(format!("invalid schema: {v}")));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() || row.iter().zip(&schema).any(|(&l, s)| l >= s.cardinality()) {
                return Err(Error::Usage(format!("record {i} does not fit the schema")));
            }
        }
        if counts.as_ref().is_some_and(|c| c.len() != rows.len()) {
            return Err(Error::Usage("counts and rows differ in length".into()));
        }
        Ok(RecordBatch { schema, rows, counts })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        match &self.counts {
            Some(c) => c.iter().sum(),
            None => self.rows.len() as u64,
        }
    }

    /// Reads CSV whose header names every schema variable, plus an optional
    /// `count` column.
    pub fn from_csv<R: Read>(reader: R, schema: Vec<VariableSpec>, origin: &str) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = csv.headers()?.clone();
        let mut columns = Vec::with_capacity(schema.len());
        for spec in &schema {
            let pos = header
                .iter()
                .position(|h| h == spec.name)
                .ok_or_else(|| parse_error(origin, format!("header lacks column `{}`", spec.name)))?;
            columns.push(pos);
        }
        let count_col = header.iter().position(|h| h == "count");
        if let Some(extra) = header.iter().find(|h| *h != "count" && !schema.iter().any(|s| s.name == *h)) {
            return Err(parse_error(origin, format!("column `{extra}` is not in the schema")));
        }
        let mut rows = Vec::new();
        let mut counts = count_col.map(|_| Vec::new());
        for record in csv.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let mut row = Vec::with_capacity(schema.len());
            for (spec, &col) in schema.iter().zip(&columns) {
                let value = record.get(col).unwrap_or("");
                let level = spec.level_index(value).ok_or_else(|| {
                    parse_error(
                        origin,
                        format!("line {line}, column `{}`: unknown level `{value}`", spec.name),
                    )
                })?;
                row.push(level);
            }
            if let (Some(col), Some(counts)) = (count_col, counts.as_mut()) {
                let raw = record.get(col).unwrap_or("");
                let n: u64 = raw.parse().map_err(|_| {
                    parse_error(
                        origin,
                        format!("line {line}, column `count`: `{raw}` is not a nonnegative integer"),
                    )
                })?;
                counts.push(n);
            }
            rows.push(row);
        }
        RecordBatch::new(schema, rows, counts)
    }

    pub fn load_csv(path: impl AsRef<Path>, schema: Vec<VariableSpec>) -> Result<Self> {
        let path = path.as_ref();
        let file =
            fs::File::open(path).map_err(|e| parse_error(&path.display().to_string(), e.to_string()))?;
        Self::from_csv(file, schema, &path.display().to_string())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.schema.iter().map(|s| s.name.as_str()).collect();
        if self.counts.is_some() {
            header.push("count");
        }
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut fields: Vec<String> =
                row.iter().zip(&self.schema).map(|(&l, s)| s.levels[l].clone()).collect();
            if let Some(c) = &self.counts {
                fields.push(c[i].to_string());
            }
            w.write_record(&fields)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    variables: Vec<VariableSpec>,
}

/// Schema JSON: `{"variables": [{"name", "levels", ["values"]}, ...]}`.
pub fn load_schema(path: impl AsRef<Path>) -> Result<Vec<VariableSpec>> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let file: SchemaFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| parse_error(&origin, e.to_string()))?;
    Ok(file.variables)
}

pub fn schema_to_json(schema: &[VariableSpec]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SchemaFile { variables: schema.to_vec() })? + "\n")
}

/// Cell probability `(count + alpha) / (N + alpha · cells)`.
pub fn estimate_joint(batch: &RecordBatch, alpha: f64) -> Result<FiniteDistribution> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::Usage(format!("smoothing must be a finite α ≥ 0, got {alpha}")));
    }
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let cards: Vec<usize> = batch.schema.iter().map(VariableSpec::cardinality).collect();
    let cells: usize = cards.iter().product();
    let mut tallies = vec![0u64; cells];
    for (i, row) in batch.rows.iter().enumerate() {
        tallies[encode(row, &cards)] += batch.counts.as_ref().map_or(1, |c| c[i]);
    }
    let denom = batch.total_weight() as f64 + alpha * cells as f64;
    if denom == 0.0 {
        return Err(Error::EmptyBatch);
    }
    FiniteDistribution::new(
        batch.schema.clone(),
        tallies.iter().map(|&n| (n as f64 + alpha) / denom).collect(),
    )
}
