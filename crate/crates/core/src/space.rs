//! Configuration spaces, datasets and the measurement oracle.
//!
//! A [`Dataset`] is the ground-truth lookup table of a configurable system: one
//! row per valid configuration, each with one or more measured objectives. It is
//! described by a manifest file and a CSV table.
//!
//! # Manifest grammar
//!
//! The manifest is a TOML document:
//!
//! ```toml
//! name = "x264"                # optional, informational
//!
//! [[option]]
//! name = "no_mbtree"
//! kind = "boolean"
//!
//! [[option]]
//! name = "threads"
//! kind = "integer"
//! min = 1                      # inclusive bounds, required for integers
//! max = 16
//!
//! [[objective]]
//! name = "encode_time"
//! direction = "minimize"       # or "maximize"
//! ```
//!
//! Option and objective names must be unique across the whole manifest and there
//! must be at least one objective. The CSV header must contain every declared
//! column; extra columns are ignored. Boolean cells accept `0`, `1`, `true` and
//! `false`; integer cells must be integral and within bounds; objective cells must
//! be finite numbers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether smaller or larger objective values are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// Maps a value so that larger is always better.
    #[inline]
    pub fn to_max(self, value: f64) -> f64 {
        match self {
            Direction::Minimize => -value,
            Direction::Maximize => value,
        }
    }

    /// `true` when `a` is strictly better than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Minimize => a < b,
            Direction::Maximize => a > b,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Minimize => "minimize",
            Direction::Maximize => "maximize",
        })
    }
}

/// Domain of a configuration option.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Boolean,
    Integer { min: i64, max: i64 },
}

impl OptionKind {
    pub fn contains(&self, value: f64) -> bool {
        if value.fract() != 0.0 {
            return false;
        }
        match *self {
            OptionKind::Boolean => value == 0.0 || value == 1.0,
            OptionKind::Integer { min, max } => value >= min as f64 && value <= max as f64,
        }
    }

    /// Inclusive value range as floats.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            OptionKind::Boolean => (0.0, 1.0),
            OptionKind::Integer { min, max } => (min as f64, max as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionSchema {
    pub name: String,
    pub kind: OptionKind,
}

impl OptionSchema {
    pub fn boolean(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: OptionKind::Boolean }
    }

    pub fn integer(name: impl Into<String>, min: i64, max: i64) -> Self {
        Self { name: name.into(), kind: OptionKind::Integer { min, max } }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveSchema {
    pub name: String,
    pub direction: Direction,
}

impl ObjectiveSchema {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        Self { name: name.into(), direction }
    }
}

/// Option values of one configuration, aligned to the dataset's option order.
///
/// Booleans are stored as `0.0` / `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(pub Vec<f64>);

impl Configuration {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn key(&self) -> Vec<i64> {
        self.0.iter().map(|v| *v as i64).collect()
    }
}

impl AsRef<[f64]> for Configuration {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Configuration {
    fn from(values: Vec<f64>) -> Self {
        Configuration(values)
    }
}

/// Index of a row within a [`Dataset`].
pub type ConfigurationId = usize;

/// Immutable table of valid configurations with their measured objectives.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: Option<String>,
    options: Vec<OptionSchema>,
    objectives: Vec<ObjectiveSchema>,
    configs: Vec<Configuration>,
    values: Vec<Vec<f64>>,
    index: HashMap<Vec<i64>, ConfigurationId>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.options == other.options
            && self.objectives == other.objectives
            && self.configs == other.configs
            && self.values == other.values
    }
}

impl Dataset {
    /// Builds and validates a dataset. Row numbers in errors are 1-based data rows.
    pub fn new(
        options: Vec<OptionSchema>,
        objectives: Vec<ObjectiveSchema>,
        rows: Vec<(Configuration, Vec<f64>)>,
    ) -> Result<Self> {
        validate_schema(&options, &objectives)?;
        if rows.len() < 2 {
            return Err(Error::Schema(format!("a dataset needs at least 2 rows, got {}", rows.len())));
        }
        let mut configs = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (config, objs)) in rows.into_iter().enumerate() {
            let row = i + 1;
            if config.len() != options.len() {
                return Err(Error::Row {
                    row,
                    message: format!("expected {} option values, got {}", options.len(), config.len()),
                });
            }
            for (schema, &v) in options.iter().zip(config.values()) {
                if !schema.kind.contains(v) {
                    return Err(Error::Row {
                        row,
                        message: format!("value {v} out of domain for option `{}`", schema.name),
                    });
                }
            }
            if objs.len() != objectives.len() {
                return Err(Error::Row {
                    row,
                    message: format!("expected {} objective values, got {}", objectives.len(), objs.len()),
                });
            }
            if let Some((k, _)) = objs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::Row { row, message: format!("objective `{}` is not finite", objectives[k].name) });
            }
            if let Some(&first) = index.get(&config.key()) {
                return Err(Error::DuplicateConfiguration { row, first: first + 1 });
            }
            index.insert(config.key(), i);
            configs.push(config);
            values.push(objs);
        }
        Ok(Self { name: None, options, objectives, configs, values, index })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn options(&self) -> &[OptionSchema] {
        &self.options
    }

    pub fn objectives(&self) -> &[ObjectiveSchema] {
        &self.objectives
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.objectives.iter().map(|o| o.direction).collect()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn config(&self, id: ConfigurationId) -> &Configuration {
        &self.configs[id]
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    /// Measured objective vector of a row.
    pub fn objective_values(&self, id: ConfigurationId) -> &[f64] {
        &self.values[id]
    }

    /// One objective column across all rows.
    pub fn column(&self, objective: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[objective]).collect()
    }

    pub fn find(&self, config: &Configuration) -> Option<ConfigurationId> {
        if config.len() != self.options.len() || config.values().iter().any(|v| v.fract() != 0.0) {
            return None;
        }
        self.index.get(&config.key()).copied()
    }

    pub fn objective_index(&self, name: &str) -> Option<usize> {
        self.objectives.iter().position(|o| o.name == name)
    }

    /// Keeps only the listed objectives, in the given order.
    pub fn select_objectives(&self, objectives: &[usize]) -> Result<Dataset> {
        if objectives.is_empty() {
            return Err(Error::InvalidParams("no objective selected".into()));
        }
        if let Some(&bad) = objectives.iter().find(|&&k| k >= self.objectives.len()) {
            return Err(Error::InvalidParams(format!("objective index {bad} out of range")));
        }
        let mut ds = self.clone();
        ds.objectives = objectives.iter().map(|&k| self.objectives[k].clone()).collect();
        ds.values = self.values.iter().map(|v| objectives.iter().map(|&k| v[k]).collect()).collect();
        Ok(ds)
    }

    /// Parses a dataset from manifest text and a CSV reader.
    pub fn from_parts<R: Read>(manifest: &Manifest, data: R) -> Result<Self> {
        let (options, objectives) = manifest.schema()?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(data);
        let header = reader.headers()?.clone();
        let position = |name: &str| -> Result<usize> {
            header.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let option_cols = options.iter().map(|o| position(&o.name)).collect::<Result<Vec<_>>>()?;
        let objective_cols = objectives.iter().map(|o| position(&o.name)).collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record?;
            let cell = |col: usize| record.get(col).unwrap_or("");
            let mut config = Vec::with_capacity(options.len());
            for (schema, &col) in options.iter().zip(&option_cols) {
                let text = cell(col);
                let value = parse_option_cell(text, schema.kind).ok_or_else(|| Error::Row {
                    row,
                    message: format!("invalid value `{text}` for option `{}`", schema.name),
                })?;
                if !schema.kind.contains(value) {
                    return Err(Error::Row {
                        row,
                        message: format!("value {value} out of bounds for option `{}`", schema.name),
                    });
                }
                config.push(value);
            }
            let mut objs = Vec::with_capacity(objectives.len());
            for (schema, &col) in objectives.iter().zip(&objective_cols) {
                let text = cell(col);
                let value = text.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Row {
                    row,
                    message: format!("non-numeric value `{text}` for objective `{}`", schema.name),
                })?;
                objs.push(value);
            }
            rows.push((Configuration(config), objs));
        }
        let ds = Dataset::new(options, objectives, rows)?;
        Ok(match &manifest.name {
            Some(name) => ds.with_name(name.clone()),
            None => ds,
        })
    }

    /// The manifest describing this dataset's columns.
    pub fn manifest(&self) -> Manifest {
        Manifest {
            name: self.name.clone(),
            option: self
                .options
                .iter()
                .map(|o| match o.kind {
                    OptionKind::Boolean => {
                        ManifestOption { name: o.name.clone(), kind: ManifestKind::Boolean, min: None, max: None }
                    }
                    OptionKind::Integer { min, max } => ManifestOption {
                        name: o.name.clone(),
                        kind: ManifestKind::Integer,
                        min: Some(min),
                        max: Some(max),
                    },
                })
                .collect(),
            objective: self
                .objectives
                .iter()
                .map(|o| ManifestObjective { name: o.name.clone(), direction: o.direction })
                .collect(),
        }
    }

    /// Writes the rows (options then objectives) as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let ids: Vec<_> = (0..self.len()).collect();
        self.write_rows_csv(&ids, out)
    }

    /// Writes a subset of rows as CSV with the dataset's header.
    pub fn write_rows_csv<W: Write>(&self, ids: &[ConfigurationId], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = self
            .options
            .iter()
            .map(|o| o.name.as_str())
            .chain(self.objectives.iter().map(|o| o.name.as_str()))
            .collect();
        w.write_record(&header)?;
        for &id in ids {
            let cells: Vec<String> = self.configs[id]
                .values()
                .iter()
                .map(|v| format!("{}", *v as i64))
                .chain(self.values[id].iter().map(|v| format!("{v}")))
                .collect();
            w.write_record(&cells)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Saves manifest and CSV to the given paths.
    pub fn save(&self, manifest_path: &Path, data_path: &Path) -> Result<()> {
        fs::write(manifest_path, self.manifest().to_toml())?;
        self.write_csv(fs::File::create(data_path)?)
    }
}

fn parse_option_cell(text: &str, kind: OptionKind) -> Option<f64> {
    match kind {
        OptionKind::Boolean => match text.to_ascii_lowercase().as_str() {
            "0" | "false" => Some(0.0),
            "1" | "true" => Some(1.0),
            other => other.parse::<f64>().ok().filter(|v| *v == 0.0 || *v == 1.0),
        },
        OptionKind::Integer { .. } => text
            .parse::<i64>()
            .ok()
            .map(|v| v as f64)
            .or_else(|| text.parse::<f64>().ok().filter(|v| v.is_finite() && v.fract() == 0.0)),
    }
}

fn validate_schema(options: &[OptionSchema], objectives: &[ObjectiveSchema]) -> Result<()> {
    if objectives.is_empty() {
        return Err(Error::Schema("at least one objective is required".into()));
    }
    let mut seen = HashSet::new();
    for name in options.iter().map(|o| &o.name).chain(objectives.iter().map(|o| &o.name)) {
        if name.is_empty() {
            return Err(Error::Schema("empty column name".into()));
        }
        if !seen.insert(name) {
            return Err(Error::Schema(format!("duplicate column name `{name}`")));
        }
    }
    for o in options {
        if let OptionKind::Integer { min, max } = o.kind {
            if min > max {
                return Err(Error::Schema(format!("option `{}` has min {min} > max {max}", o.name)));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestKind {
    #[serde(alias = "bool")]
    Boolean,
    #[serde(alias = "int")]
    Integer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestOption {
    pub name: String,
    pub kind: ManifestKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestObjective {
    pub name: String,
    pub direction: Direction,
}

/// Column declarations of a dataset, see the module docs for the grammar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub option: Vec<ManifestOption>,
    #[serde(default)]
    pub objective: Vec<ManifestObjective>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Manifest { path: "<inline>".into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Manifest { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Validated option and objective schemas.
    pub fn schema(&self) -> Result<(Vec<OptionSchema>, Vec<ObjectiveSchema>)> {
        let options = self
            .option
            .iter()
            .map(|o| match (o.kind, o.min, o.max) {
                (ManifestKind::Boolean, None, None) => Ok(OptionSchema::boolean(&o.name)),
                (ManifestKind::Boolean, _, _) => {
                    Err(Error::Schema(format!("boolean option `{}` cannot carry bounds", o.name)))
                }
                (ManifestKind::Integer, Some(min), Some(max)) => Ok(OptionSchema::integer(&o.name, min, max)),
                (ManifestKind::Integer, _, _) => {
                    Err(Error::Schema(format!("integer option `{}` needs both min and max", o.name)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let objectives = self.objective.iter().map(|o| ObjectiveSchema::new(&o.name, o.direction)).collect::<Vec<_>>();
        validate_schema(&options, &objectives)?;
        Ok((options, objectives))
    }
}

/// Loads a dataset from a manifest file and a CSV file.
pub fn load_dataset(manifest_path: &Path, data_path: &Path) -> Result<Dataset> {
    let manifest = Manifest::load(manifest_path)?;
    let file = fs::File::open(data_path)?;
    Dataset::from_parts(&manifest, file)
}

/// Fractions of a train / holdout / validation split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub holdout_fraction: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    /// 40% training pool, 20% holdout, 40% validation pool.
    pub fn standard(seed: u64) -> Self {
        Self { train_fraction: 0.4, holdout_fraction: 0.2, validation_fraction: 0.4, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = [self.train_fraction, self.holdout_fraction, self.validation_fraction];
        if fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::Split(format!("fractions must lie in (0, 1): {fractions:?}")));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("fractions must sum to 1: {fractions:?}")));
        }
        Ok(())
    }
}

/// Disjoint row-index sets covering a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<ConfigurationId>,
    pub holdout: Vec<ConfigurationId>,
    pub validation: Vec<ConfigurationId>,
}

impl Split {
    /// Training and validation pools merged, the candidate set for FLASH.
    pub fn merged_pool(&self) -> Vec<ConfigurationId> {
        let mut pool: Vec<_> = self.train.iter().chain(&self.validation).copied().collect();
        pool.sort_unstable();
        pool
    }
}

/// Randomly partitions the rows of `dataset`.
///
/// Holdout and validation get `floor(fraction * n)` rows; the remainder goes to the
/// training pool. Each part is returned in ascending index order.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let n = dataset.len();
    let holdout_len = (spec.holdout_fraction * n as f64).floor() as usize;
    let validation_len = (spec.validation_fraction * n as f64).floor() as usize;
    let train_len = n - holdout_len - validation_len;
    if holdout_len == 0 || validation_len == 0 || train_len == 0 {
        return Err(Error::Split(format!(
            "{n} rows cannot be split into non-empty parts ({train_len}, {holdout_len}, {validation_len})"
        )));
    }
    let mut ids: Vec<ConfigurationId> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut train = ids[..train_len].to_vec();
    let mut holdout = ids[train_len..train_len + holdout_len].to_vec();
    let mut validation = ids[train_len + holdout_len..].to_vec();
    train.sort_unstable();
    holdout.sort_unstable();
    validation.sort_unstable();
    Ok(Split { train, holdout, validation })
}

/// A benchmark command; `{option_name}` placeholders are replaced by option values.
///
/// The command runs under `sh -c` and must print one number per objective,
/// separated by whitespace or commas, on standard output.
#[derive(Debug, Clone)]
pub struct ExternalCommand {
    pub template: String,
    pub timeout: Duration,
    pub option_names: Vec<String>,
    pub n_objectives: usize,
}

impl ExternalCommand {
    pub fn render(&self, config: &Configuration) -> Result<String> {
        if config.len() != self.option_names.len() {
            return Err(Error::Dimension { expected: self.option_names.len(), got: config.len() });
        }
        let mut command = self.template.clone();
        // longest names first so `{a}` never clobbers part of `{ab}`
        let mut order: Vec<usize> = (0..self.option_names.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.option_names[i].len()));
        for i in order {
            let placeholder = format!("{{{}}}", self.option_names[i]);
            command = command.replace(&placeholder, &format!("{}", config.values()[i] as i64));
        }
        Ok(command)
    }

    fn run(&self, config: &Configuration) -> Result<Vec<f64>> {
        let command = self.render(config)?;
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            stdout.read_to_string(&mut buf).map(|_| buf)
        });
        let start = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if start.elapsed() >= self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Command(format!("`{command}` timed out after {:?}", self.timeout)));
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let output = reader.join().map_err(|_| Error::Command("output reader panicked".into()))??;
        if !status.success() {
            return Err(Error::Command(format!("`{command}` exited with {status}")));
        }
        let values = output
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Command(format!("unparseable output {output:?}")))?;
        if values.len() != self.n_objectives {
            return Err(Error::Command(format!(
                "expected {} objective values, command printed {}",
                self.n_objectives,
                values.len()
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone)]
pub enum OracleMode<'a> {
    Table(&'a Dataset),
    External(ExternalCommand),
}

/// The true performance function, with a counter of consumed measurements.
///
/// One oracle belongs to one optimizer run at a time.
#[derive(Debug, Clone)]
pub struct MeasurementOracle<'a> {
    mode: OracleMode<'a>,
    count: usize,
}

impl<'a> MeasurementOracle<'a> {
    pub fn table(dataset: &'a Dataset) -> Self {
        Self { mode: OracleMode::Table(dataset), count: 0 }
    }

    pub fn external(command: ExternalCommand) -> Self {
        Self { mode: OracleMode::External(command), count: 0 }
    }

    pub fn mode(&self) -> &OracleMode<'a> {
        &self.mode
    }

    /// Number of measurements consumed so far.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Measures one configuration. The counter is incremented even if the
    /// measurement fails, since the benchmark was still run.
    pub fn measure(&mut self, config: &Configuration) -> Result<Vec<f64>> {
        self.count += 1;
        match &self.mode {
            OracleMode::Table(ds) => {
                let id = ds.find(config).ok_or(Error::UnknownConfiguration)?;
                Ok(ds.objective_values(id).to_vec())
            }
            OracleMode::External(cmd) => cmd.run(config),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BOOLS: &str = r#"
        [[option]]
        name = "a"
        kind = "boolean"
        [[option]]
        name = "b"
        kind = "boolean"
        [[objective]]
        name = "perf"
        direction = "minimize"
    "#;

    fn two_bools(csv: &str) -> Result<Dataset> {
        Dataset::from_parts(&Manifest::parse(TWO_BOOLS).unwrap(), csv.as_bytes())
    }

    #[test]
    fn loads_exhaustive_two_option_space() {
        let ds = two_bools("a,b,perf\n0,0,4\n0,1,3\n1,0,2\n1,1,1\n").unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.options().len(), 2);
        assert_eq!(ds.objectives().len(), 1);
        assert_eq!(ds.objective_values(2), &[2.0]);
    }

    #[test]
    fn rejects_duplicate_configuration() {
        let err = two_bools("a,b,perf\n0,0,4\n0,1,3\n0,0,2\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateConfiguration { row: 3, first: 1 }), "{err}");
    }

    #[test]
    fn missing_column_is_named() {
        let err = two_bools("a,perf\n0,4\n1,3\n").unwrap_err();
        assert!(matches!(&err, Error::MissingColumn(c) if c == "b"), "{err}");
    }

    #[test]
    fn row_errors_carry_row_number() {
        let err = two_bools("a,b,perf\n0,0,4\n0,1,fast\n").unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
        let err = two_bools("a,b,perf\n0,0,4\n2,1,3\n").unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
    }

    #[test]
    fn integer_bounds_enforced() {
        let manifest = Manifest::parse(
            r#"
            [[option]]
            name = "threads"
            kind = "integer"
            min = 1
            max = 4
            [[objective]]
            name = "t"
            direction = "maximize"
            "#,
        )
        .unwrap();
        assert!(Dataset::from_parts(&manifest, "threads,t\n1,1\n4,2\n".as_bytes()).is_ok());
        let err = Dataset::from_parts(&manifest, "threads,t\n1,1\n5,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }));
        let err = Dataset::from_parts(&manifest, "threads,t\n1,1\n2.5,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }));
    }

    #[test]
    fn extra_columns_are_ignored() {
        let ds = two_bools("id,a,b,perf,notes\n7,0,0,4,x\n8,1,1,1,y\n").unwrap();
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn manifest_grammar_errors() {
        // unknown key
        assert!(Manifest::parse("[[option]]\nname='a'\nkind='boolean'\nstep=2\n").is_err());
        // unknown kind
        assert!(Manifest::parse("[[option]]\nname='a'\nkind='float'\n").is_err());
        let no_bounds =
            Manifest::parse("[[option]]\nname='a'\nkind='integer'\n[[objective]]\nname='y'\ndirection='minimize'\n")
                .unwrap();
        assert!(matches!(no_bounds.schema(), Err(Error::Schema(_))));
        let no_objective = Manifest::parse("[[option]]\nname='a'\nkind='bool'\n").unwrap();
        assert!(matches!(no_objective.schema(), Err(Error::Schema(_))));
        let clash =
            Manifest::parse("[[option]]\nname='y'\nkind='bool'\n[[objective]]\nname='y'\ndirection='minimize'\n")
                .unwrap();
        assert!(matches!(clash.schema(), Err(Error::Schema(_))));
        let inverted = Manifest::parse(
            "[[option]]\nname='a'\nkind='int'\nmin=3\nmax=1\n[[objective]]\nname='y'\ndirection='maximize'\n",
        )
        .unwrap();
        assert!(matches!(inverted.schema(), Err(Error::Schema(_))));
    }

    #[test]
    fn split_sizes_and_partition() {
        let rows = (0..10).map(|i| (Configuration(vec![i as f64]), vec![i as f64])).collect();
        let ds = Dataset::new(
            vec![OptionSchema::integer("x", 0, 9)],
            vec![ObjectiveSchema::new("y", Direction::Minimize)],
            rows,
        )
        .unwrap();
        let s = split(&ds, &SplitSpec::standard(7)).unwrap();
        assert_eq!((s.train.len(), s.holdout.len(), s.validation.len()), (4, 2, 4));
        let mut all: Vec<_> = s.train.iter().chain(&s.holdout).chain(&s.validation).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(s, split(&ds, &SplitSpec::standard(7)).unwrap());
    }

    #[test]
    fn split_rejects_infeasible() {
        let rows = (0..3).map(|i| (Configuration(vec![i as f64]), vec![1.0])).collect();
        let ds = Dataset::new(
            vec![OptionSchema::integer("x", 0, 9)],
            vec![ObjectiveSchema::new("y", Direction::Minimize)],
            rows,
        )
        .unwrap();
        assert!(matches!(split(&ds, &SplitSpec::standard(1)), Err(Error::Split(_))));
        let bad = SplitSpec { train_fraction: 0.5, holdout_fraction: 0.3, validation_fraction: 0.3, seed: 0 };
        assert!(matches!(bad.validate(), Err(Error::Split(_))));
    }

    #[test]
    fn table_oracle_counts() {
        let ds = two_bools("a,b,perf\n0,0,4\n0,1,3\n1,0,2\n1,1,1\n").unwrap();
        let mut oracle = MeasurementOracle::table(&ds);
        assert_eq!(oracle.measure(ds.config(0)).unwrap(), vec![4.0]);
        assert_eq!(oracle.count(), 1);
        oracle.measure(ds.config(3)).unwrap();
        assert_eq!(oracle.count(), 2);
        let unknown = Configuration(vec![0.0, 0.5]);
        assert!(matches!(oracle.measure(&unknown), Err(Error::UnknownConfiguration)));
    }

    #[test]
    fn external_oracle_echo() {
        let cmd = ExternalCommand {
            template: "echo 42.0".into(),
            timeout: Duration::from_secs(10),
            option_names: vec!["a".into(), "b".into()],
            n_objectives: 1,
        };
        let mut oracle = MeasurementOracle::external(cmd);
        assert_eq!(oracle.measure(&Configuration(vec![1.0, 0.0])).unwrap(), vec![42.0]);
        assert_eq!(oracle.count(), 1);
    }

    #[test]
    fn external_oracle_renders_options() {
        let cmd = ExternalCommand {
            template: "echo $(( {a} * 10 + {ab} )), {a}".into(),
            timeout: Duration::from_secs(10),
            option_names: vec!["a".into(), "ab".into()],
            n_objectives: 2,
        };
        let mut oracle = MeasurementOracle::external(cmd);
        assert_eq!(oracle.measure(&Configuration(vec![3.0, 4.0])).unwrap(), vec![34.0, 3.0]);
    }

    #[test]
    fn external_oracle_failures() {
        let base = ExternalCommand {
            template: "exit 3".into(),
            timeout: Duration::from_secs(10),
            option_names: vec![],
            n_objectives: 1,
        };
        let mut oracle = MeasurementOracle::external(base.clone());
        assert!(matches!(oracle.measure(&Configuration(vec![])), Err(Error::Command(_))));

        let garbage = ExternalCommand { template: "echo fast".into(), ..base.clone() };
        assert!(matches!(MeasurementOracle::external(garbage).measure(&Configuration(vec![])), Err(Error::Command(_))));

        let slow = ExternalCommand { template: "sleep 5".into(), timeout: Duration::from_millis(100), ..base };
        let start = Instant::now();
        assert!(matches!(MeasurementOracle::external(slow).measure(&Configuration(vec![])), Err(Error::Command(_))));
        assert!(start.elapsed() < Duration::from_secs(4));
    }
}
