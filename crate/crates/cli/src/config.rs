//! Run configuration: a TOML file with one table per stage. Every key has a
//! default, so an empty file is a valid configuration.
//!
//! Any key can be overridden from the environment as
//! `THEMATIC_<SECTION>_<KEY>` (upper case), e.g. `THEMATIC_LDA_TRAIN_ITERS=200`
//! or `THEMATIC_EXPERIMENT_N_VALUES=[10,20]`. Values are parsed as TOML and
//! fall back to plain strings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thematic_core::corpus::{CorpusFormat, CsvAdapter};
use thematic_core::pipeline::{ExperimentConfig, LdaTemplate, DEFAULT_L_VALUES, DEFAULT_N_VALUES};
use thematic_core::stats::TTestOptions;
use thematic_core::textprep::TextPrepConfig;
use thematic_core::{Error, Label, Metric, Result};

pub const ENV_PREFIX: &str = "THEMATIC_";

pub const SECTIONS: [&str; 6] = ["corpus", "textprep", "lda", "experiment", "stats", "report"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Jsonl,
    Csv,
    /// Directory holding `Fake.csv` and `True.csv`.
    Isot,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            "isot" => Ok(InputFormat::Isot),
            other => Err(Error::Config(format!("format {other:?} is not one of jsonl, csv, isot"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub path: Option<PathBuf>,
    pub format: InputFormat,
    pub id_column: Option<String>,
    pub label_column: Option<String>,
    pub text_column: String,
    /// Label for every row when the file has no label column.
    pub fixed_label: Option<Label>,
    pub id_prefix: String,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let a = CsvAdapter::default();
        CorpusSection {
            path: None,
            format: InputFormat::Jsonl,
            id_column: a.id_column,
            label_column: a.label_column,
            text_column: a.text_column,
            fixed_label: a.fixed_label,
            id_prefix: a.id_prefix,
        }
    }
}

impl CorpusSection {
    pub fn csv_adapter(&self) -> CsvAdapter {
        CsvAdapter {
            id_column: self.id_column.clone(),
            label_column: self.label_column.clone(),
            fixed_label: self.fixed_label,
            text_column: self.text_column.clone(),
            id_prefix: self.id_prefix.clone(),
        }
    }

    pub fn corpus_format(&self) -> Option<CorpusFormat> {
        match self.format {
            InputFormat::Jsonl => Some(CorpusFormat::Jsonl),
            InputFormat::Csv => Some(CorpusFormat::Csv(self.csv_adapter())),
            InputFormat::Isot => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub l_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            l_values: DEFAULT_L_VALUES.to_vec(),
            n_values: DEFAULT_N_VALUES.to_vec(),
            metrics: Metric::ALL.to_vec(),
            seed: 0,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Row name in the summary tables; defaults to the corpus file stem.
    pub dataset: Option<String>,
    /// Opening length of the summary tables; defaults to the largest l.
    pub table_l: Option<usize>,
    /// Topic count of the p-value table; unset pools every N per article.
    pub table_n: Option<usize>,
    /// Metric of the plot data file.
    pub plot_metric: Metric,
    pub rank_k: usize,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            dataset: None,
            table_l: None,
            table_n: None,
            plot_metric: Metric::Chebyshev,
            rank_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub corpus: CorpusSection,
    pub textprep: TextPrepConfig,
    pub lda: LdaTemplate,
    pub experiment: ExperimentSection,
    pub stats: TTestOptions,
    pub report: ReportSection,
}

impl Config {
    /// Reads `path` (if given), then applies environment overrides from
    /// `env`.
    pub fn load<I>(path: Option<&Path>, env: I) -> Result<Config>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        apply_env(&mut table, env)?;
        let config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            l_values: self.experiment.l_values.clone(),
            n_values: self.experiment.n_values.clone(),
            lda: self.lda.clone(),
            metrics: self.experiment.metrics.clone(),
            seed: self.experiment.seed,
            test: self.stats,
            textprep: self.textprep.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn apply_env<I>(table: &mut toml::Table, env: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = SECTIONS
            .iter()
            .find_map(|s| rest.strip_prefix(&format!("{s}_")).map(|k| (*s, k.to_string())))
        else {
            continue;
        };
        let value = parse_env_value(&raw);
        let entry = table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key, value);
            }
            _ => return Err(Error::Config(format!("[{section}] is not a table"))),
        }
    }
    Ok(())
}

fn parse_env_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let c = Config::load(None, env(&[])).unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.experiment.n_values, DEFAULT_N_VALUES);
        assert!(c.experiment().validate().is_ok());
    }

    #[test]
    fn file_and_env_layers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(
            &p,
            "[experiment]\nl_values = [1, 5]\nmetrics = [\"ch\"]\n[lda]\ntrain_iters = 80\n[textprep]\nnormalizer = \"none\"\n",
        )
        .unwrap();
        let c = Config::load(
            Some(&p),
            env(&[
                ("THEMATIC_LDA_TRAIN_ITERS", "120"),
                ("THEMATIC_EXPERIMENT_N_VALUES", "[4, 8]"),
                ("THEMATIC_REPORT_DATASET", "isot"),
                ("THEMATIC_STATS_VARIANCE", "pooled"),
                ("OTHER_VAR", "1"),
            ]),
        )
        .unwrap();
        assert_eq!(c.experiment.l_values, [1, 5]);
        assert_eq!(c.experiment.metrics, [Metric::Chebyshev]);
        assert_eq!(c.lda.train_iters, 120);
        assert_eq!(c.experiment.n_values, [4, 8]);
        assert_eq!(c.report.dataset.as_deref(), Some("isot"));
        assert_eq!(c.stats.variance, thematic_core::stats::VarianceModel::Pooled);
        assert_eq!(c.textprep.normalizer, thematic_core::textprep::Normalizer::None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[lda]\ntopics = 3\n").unwrap();
        assert!(matches!(Config::load(Some(&p), env(&[])), Err(Error::Config(_))));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = Config::default();
        c.report.table_n = Some(20);
        c.lda.alpha = Some(0.5);
        let back: Config = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
