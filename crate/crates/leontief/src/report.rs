//! Report assembly and serialization: JSON analysis reports, DOT flow webs,
//! CSV panel exports, and the pipeline drivers behind the CLI subcommands.

use crate::chain::{absorption_times, ChainAnalysis, ChainError, SensitivityKind};
use crate::graph::{adjacency_from_matrix, essential_flows, strong_components, Digraph, GraphError};
use crate::matrix::MatrixError;
use crate::spectral::{spectral_summary, SpectralError};
use crate::stats::{panel_correlate, CorrelationMatrix, PanelField, PanelRow, StatsError};
use crate::table::{
    augment, coefficients, parse_flow_table, AugmentedChain, FlowTable, Orientation, ParseOptions,
};
use crate::walk::{compare_to_fundamental, simulate, CompareReport, WalkError, WalkStats};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

/// Pipeline failure with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Table(#[from] crate::table::TableError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Usage(String),
}

impl PipelineError {
    /// 1 = validation, 2 = I/O, 3 = numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => 2,
            PipelineError::Numerical(_) => 3,
            _ => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<ChainError> for PipelineError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::NonProductive { .. } => PipelineError::Numerical(e.to_string()),
            ChainError::Matrix(m) => PipelineError::from(m),
            ChainError::Graph(g) => PipelineError::Graph(g),
            other => PipelineError::Usage(other.to_string()),
        }
    }
}

impl From<MatrixError> for PipelineError {
    fn from(e: MatrixError) -> Self {
        PipelineError::Numerical(e.to_string())
    }
}

impl From<SpectralError> for PipelineError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Matrix(m) => PipelineError::from(m),
            other => PipelineError::Usage(other.to_string()),
        }
    }
}

/// Finite number or an explicit `"inf"` token; JSON never carries a bare
/// non-finite float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else {
            serializer.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Token(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Token(s) if s == "inf" => Ok(Bound(f64::INFINITY)),
            Raw::Token(s) => Err(D::Error::custom(format!("unknown bound token {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub source: String,
    pub poles: usize,
    pub orientation: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_star: f64,
    pub gap: f64,
    pub t_rel: Bound,
    pub node_min: f64,
    pub node_mean: f64,
    pub node_max: f64,
    pub f_value: Option<f64>,
    pub structure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTimes {
    pub pole: String,
    pub t: f64,
    pub t_upper: Bound,
    pub t_lower: Bound,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntryReport {
    pub value: f64,
    pub origin: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityExtremes {
    pub kind: String,
    pub top: Vec<SensitivityEntryReport>,
    pub bottom: Vec<SensitivityEntryReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub id: usize,
    pub members: Vec<String>,
    pub closed: bool,
}

/// Full analysis report; serializes losslessly to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: ReportMetadata,
    pub spectral: SpectralReport,
    pub times: Vec<PoleTimes>,
    pub sensitivity_extremes: SensitivityExtremes,
    pub components: Vec<ComponentReport>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub orientation: Orientation,
    pub parse: ParseOptions,
    /// Entries per extreme list.
    pub top_k: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            orientation: Orientation::Indirect,
            parse: ParseOptions::default(),
            top_k: 5,
        }
    }
}

fn read_table(path: &Path, parse: ParseOptions) -> Result<FlowTable, PipelineError> {
    let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(parse_flow_table(file, parse)?)
}

fn chain_digraph(chain: &AugmentedChain) -> Result<Digraph, GraphError> {
    adjacency_from_matrix(&chain.transition, &chain.labels, 0.0)
}

fn component_reports(chain: &AugmentedChain) -> Result<Vec<ComponentReport>, GraphError> {
    let g = chain_digraph(chain)?;
    let partition = strong_components(&g);
    let mut closed = vec![true; partition.components.len()];
    for (from, to, _) in g.arcs() {
        if partition.component_of[from] != partition.component_of[to] {
            closed[partition.component_of[from]] = false;
        }
    }
    Ok(partition
        .components
        .iter()
        .enumerate()
        .map(|(id, members)| ComponentReport {
            id,
            members: members.iter().map(|&v| chain.labels[v].clone()).collect(),
            closed: closed[id],
        })
        .collect())
}

/// Full analysis pipeline: parse, coefficients, augmentation, chain
/// analytics, spectral summary, report.
pub fn analyze(path: &Path, options: AnalyzeOptions) -> Result<AnalysisReport, PipelineError> {
    let table = read_table(path, options.parse)?;
    analyze_table(&table, &path.display().to_string(), options)
}

/// Same pipeline over an already parsed table.
pub fn analyze_table(
    table: &FlowTable,
    source: &str,
    options: AnalyzeOptions,
) -> Result<AnalysisReport, PipelineError> {
    let coeffs = coefficients(table);
    let chain = augment(&coeffs, options.orientation);
    let analysis = ChainAnalysis::from_coefficients(&coeffs)?;
    let spectral = spectral_summary(&coeffs)?;

    let times = (0..table.pole_count())
        .map(|i| PoleTimes {
            pole: table.poles[i].clone(),
            t: analysis.t[i],
            t_upper: Bound(analysis.t_upper[i]),
            t_lower: Bound(analysis.t_lower[i]),
            dt: analysis.dt_ratio[i],
        })
        .collect();

    let entry = |e: &crate::chain::SensitivityEntry| SensitivityEntryReport {
        value: e.value,
        // O_ij = dX_i / dY_j: the shock originates at j and lands on i.
        origin: table.poles[e.col].clone(),
        target: table.poles[e.row].clone(),
    };
    let kind = SensitivityKind::OutputWrtFinalDemand;
    let sensitivity_extremes = SensitivityExtremes {
        kind: "output_wrt_final_demand".to_string(),
        top: analysis
            .top_sensitivities(kind, options.top_k)
            .iter()
            .map(entry)
            .collect(),
        bottom: analysis
            .bottom_sensitivities(kind, options.top_k)
            .iter()
            .map(entry)
            .collect(),
    };

    Ok(AnalysisReport {
        metadata: ReportMetadata {
            source: source.to_string(),
            poles: table.pole_count(),
            orientation: options.orientation.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        spectral: SpectralReport {
            lambda_star: spectral.lambda_star,
            gap: spectral.gap,
            t_rel: Bound(spectral.t_rel),
            node_min: spectral.nodes.min,
            node_mean: spectral.nodes.mean,
            node_max: spectral.nodes.max,
            f_value: spectral.f_value,
            structure: spectral.structure.map(|s| s.as_str().to_string()),
        },
        times,
        sensitivity_extremes,
        components: component_reports(&chain)?,
        diagnostics: table.diagnostics.clone(),
    })
}

/// Threshold selector for the flow-web export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    /// `1 / (n + 1)` over the augmented state count.
    Fair,
    Value(f64),
}

impl std::str::FromStr for ThresholdSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("fair") {
            return Ok(ThresholdSpec::Fair);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("threshold must be 'fair' or a number, got {s:?}"))?;
        Ok(ThresholdSpec::Value(v))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GraphOptions {
    pub orientation: Orientation,
    pub threshold: ThresholdSpec,
    /// Keep pole self-loops. The absorbing state's structural self-loop is
    /// never drawn.
    pub self_loops: bool,
    pub parse: ParseOptions,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            orientation: Orientation::Indirect,
            threshold: ThresholdSpec::Fair,
            self_loops: false,
            parse: ParseOptions::default(),
        }
    }
}

/// Emits the essential-flow web of a table as DOT source.
pub fn graph_dot(path: &Path, options: GraphOptions) -> Result<String, PipelineError> {
    let table = read_table(path, options.parse)?;
    graph_dot_table(&table, options)
}

pub fn graph_dot_table(
    table: &FlowTable,
    options: GraphOptions,
) -> Result<String, PipelineError> {
    let chain = augment(&coefficients(table), options.orientation);
    let threshold = match options.threshold {
        ThresholdSpec::Fair => 1.0 / chain.transition.rows() as f64,
        ThresholdSpec::Value(v) => {
            if !(v > 0.0 && v <= 1.0) {
                return Err(PipelineError::Usage(format!(
                    "threshold must lie in (0, 1], got {v}"
                )));
            }
            v
        }
    };
    let g = chain_digraph(&chain)?;
    let filtered = essential_flows(&g, threshold);
    Ok(render_dot(
        &filtered,
        chain.absorbing_index,
        options.self_loops,
    ))
}

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a weighted digraph as DOT, weights with six decimals.
pub fn render_dot(g: &Digraph, absorbing: usize, keep_self_loops: bool) -> String {
    let mut out = String::from("digraph flows {\n  rankdir=LR;\n");
    for label in g.labels() {
        out.push_str(&format!("  {};\n", quote(label)));
    }
    for (from, to, weight) in g.arcs() {
        if from == to && (from == absorbing || !keep_self_loops) {
            continue;
        }
        out.push_str(&format!(
            "  {} -> {} [label=\"{:.6}\"];\n",
            quote(&g.labels()[from]),
            quote(&g.labels()[to]),
            weight
        ));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub orientation: Orientation,
    pub start: String,
    pub walks: u64,
    pub seed: u64,
    pub step_cap: u64,
    pub parse: ParseOptions,
}

/// Simulation report: empirical walk statistics plus the z-scored comparison
/// against the analytic fundamental matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub metadata: ReportMetadata,
    pub start_pole: String,
    pub stats: WalkStats,
    pub compare: CompareReport,
}

/// Runs the Monte-Carlo oracle against a table and compares with the
/// analytic absorption quantities.
pub fn simulate_run(
    path: &Path,
    options: &SimulateOptions,
) -> Result<SimulationReport, PipelineError> {
    let table = read_table(path, options.parse)?;
    let chain = augment(&coefficients(&table), options.orientation);
    let start = table.pole_index(&options.start).ok_or_else(|| {
        PipelineError::Usage(format!("unknown start pole {:?}", options.start))
    })?;
    let stats = simulate(&chain, start, options.walks, options.seed, options.step_cap)?;
    let split = chain.absorption_analysis()?;
    let t = absorption_times(&split.fundamental);
    let compare = compare_to_fundamental(&stats, &split.fundamental, &t, &chain.labels);
    Ok(SimulationReport {
        metadata: ReportMetadata {
            source: path.display().to_string(),
            poles: table.pole_count(),
            orientation: options.orientation.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        start_pole: options.start.clone(),
        stats,
        compare,
    })
}

const SUMMARY_HEADER: &str = "country,growth_rate,lambda_star,t_rel,node_max,node_mean,node_min,f_value,max_t,argmax_t,min_t,argmin_t";

/// Parses the panel manifest `country,growth_rate,table_path`; paths resolve
/// relative to the manifest location.
pub fn parse_panel_manifest(
    path: &Path,
) -> Result<Vec<(String, f64, PathBuf)>, PipelineError> {
    let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    {
        let got = reader
            .headers()
            .map_err(crate::table::TableError::from)?
            .clone();
        let got: Vec<&str> = got.iter().collect();
        if got != ["country", "growth_rate", "table_path"] {
            return Err(PipelineError::Usage(format!(
                "manifest header must be country,growth_rate,table_path, got {got:?}"
            )));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(crate::table::TableError::from)?;
        if record.len() != 3 {
            return Err(PipelineError::Usage(format!(
                "manifest rows need 3 cells, got {}",
                record.len()
            )));
        }
        let growth: f64 = record[1].parse().map_err(|_| {
            PipelineError::Usage(format!("bad growth rate {:?} for {}", &record[1], &record[0]))
        })?;
        rows.push((record[0].to_string(), growth, base.join(&record[2])));
    }
    Ok(rows)
}

/// Parses precomputed summary rows (the `--summary-override` input, same
/// columns as the summary export).
pub fn parse_summary_rows(source: impl Read) -> Result<Vec<PanelRow>, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let expected: Vec<&str> = SUMMARY_HEADER.split(',').collect();
    {
        let got = reader
            .headers()
            .map_err(crate::table::TableError::from)?
            .clone();
        let got: Vec<&str> = got.iter().collect();
        if got != expected {
            return Err(PipelineError::Usage(format!(
                "summary header must be {SUMMARY_HEADER:?}, got {got:?}"
            )));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record.map_err(crate::table::TableError::from)?;
        let num = |idx: usize| -> Result<f64, PipelineError> {
            r[idx].parse().map_err(|_| {
                PipelineError::Usage(format!(
                    "bad numeric cell {:?} in summary column {}",
                    &r[idx], expected[idx]
                ))
            })
        };
        rows.push(PanelRow {
            country: r[0].to_string(),
            growth_rate: num(1)?,
            lambda_star: num(2)?,
            t_rel: num(3)?,
            node_max: num(4)?,
            node_mean: num(5)?,
            node_min: num(6)?,
            f_value: num(7)?,
            max_t: num(8)?,
            argmax_t: r[9].to_string(),
            min_t: num(10)?,
            argmin_t: r[11].to_string(),
        });
    }
    Ok(rows)
}

/// Builds one panel summary row by running the full pipeline over a table.
pub fn build_panel_row(
    country: &str,
    growth_rate: f64,
    table_path: &Path,
    parse: ParseOptions,
) -> Result<PanelRow, PipelineError> {
    let table = read_table(table_path, parse)?;
    let coeffs = coefficients(&table);
    let analysis = ChainAnalysis::from_coefficients(&coeffs)?;
    let spectral = spectral_summary(&coeffs)?;
    let f_value = spectral.f_value.ok_or_else(|| {
        PipelineError::Usage(format!(
            "{country}: uniform final-demand rates leave the dominance measure undefined"
        ))
    })?;
    let (mut max_i, mut min_i) = (0, 0);
    for (i, &t) in analysis.t.iter().enumerate() {
        if t > analysis.t[max_i] {
            max_i = i;
        }
        if t < analysis.t[min_i] {
            min_i = i;
        }
    }
    Ok(PanelRow {
        country: country.to_string(),
        growth_rate,
        lambda_star: spectral.lambda_star,
        t_rel: spectral.t_rel,
        node_max: spectral.nodes.max,
        node_mean: spectral.nodes.mean,
        node_min: spectral.nodes.min,
        f_value,
        max_t: analysis.t[max_i],
        argmax_t: table.poles[max_i].clone(),
        min_t: analysis.t[min_i],
        argmin_t: table.poles[min_i].clone(),
    })
}

/// Serializes summary rows to CSV.
pub fn summary_csv(rows: &[PanelRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.country,
            r.growth_rate,
            r.lambda_star,
            r.t_rel,
            r.node_max,
            r.node_mean,
            r.node_min,
            r.f_value,
            r.max_t,
            r.argmax_t,
            r.min_t,
            r.argmin_t
        ));
    }
    out
}

/// Long-format correlation CSV: one row per ordered field pair.
pub fn correlation_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = String::from("field_a,field_b,r,p_value,n\n");
    let k = matrix.fields.len();
    for i in 0..k {
        for j in 0..k {
            let cell = matrix.cell(i, j);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                matrix.fields[i].name(),
                matrix.fields[j].name(),
                cell.r,
                cell.p_value,
                cell.n
            ));
        }
    }
    out
}

/// Plot-ready scatter CSV: `pair,x,y,label` per country and field pair.
pub fn scatter_csv(rows: &[PanelRow], fields: &[PanelField]) -> String {
    let mut out = String::from("pair,x,y,label\n");
    for i in 0..fields.len() {
        for j in (i + 1)..fields.len() {
            let pair = format!("{}~{}", fields[i].name(), fields[j].name());
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    pair,
                    fields[i].value(r),
                    fields[j].value(r),
                    r.country
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub exclude: Vec<String>,
    pub parse: ParseOptions,
}

/// Benchmark pipeline output; `failures` lists countries whose tables could
/// not be analyzed.
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub rows: Vec<PanelRow>,
    pub summary_csv: String,
    pub correlations_csv: String,
    pub scatter_csv: String,
    pub diagnostics: Vec<String>,
    pub failures: Vec<String>,
}

/// Correlation fields of the benchmark study.
pub const BENCH_FIELDS: [PanelField; 3] = [
    PanelField::GrowthRate,
    PanelField::LambdaStar,
    PanelField::MaxT,
];

/// Assembles the panel (from per-country tables or precomputed summary rows)
/// and runs the correlation study.
pub fn bench(
    manifest: Option<&Path>,
    summary_override: Option<&Path>,
    options: &BenchOptions,
) -> Result<BenchOutput, PipelineError> {
    let mut failures = Vec::new();
    let rows: Vec<PanelRow> = match (summary_override, manifest) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
            parse_summary_rows(file)?
        }
        (None, Some(path)) => {
            let mut rows = Vec::new();
            for (country, growth, table_path) in parse_panel_manifest(path)? {
                match build_panel_row(&country, growth, &table_path, options.parse) {
                    Ok(row) => rows.push(row),
                    Err(e) => failures.push(format!("{country}: {e}")),
                }
            }
            rows
        }
        (None, None) => {
            return Err(PipelineError::Usage(
                "bench needs a panel manifest or --summary-override".into(),
            ))
        }
    };

    let mut diagnostics = Vec::new();
    for row in &rows {
        diagnostics.extend(row.validate());
    }
    let matrix = panel_correlate(&rows, &BENCH_FIELDS, &options.exclude)?;
    let kept: Vec<PanelRow> = rows
        .iter()
        .filter(|r| !options.exclude.contains(&r.country))
        .cloned()
        .collect();
    Ok(BenchOutput {
        summary_csv: summary_csv(&rows),
        correlations_csv: correlation_csv(&matrix),
        scatter_csv: scatter_csv(&kept, &BENCH_FIELDS),
        rows,
        diagnostics,
        failures,
    })
}

/// Stable pretty JSON used by every report writer.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serialization");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const TWO_POLE_CSV: &str = "pole,P1,P2,Y\nP1,0.1,0.4,0.5\nP2,0.2,0.8,1.0\n";

    fn two_pole_file() -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(TWO_POLE_CSV.as_bytes()).unwrap();
        f
    }

    #[test]
    fn bound_serialization_tokens() {
        assert_eq!(serde_json::to_string(&Bound(2.5)).unwrap(), "2.5");
        assert_eq!(
            serde_json::to_string(&Bound(f64::INFINITY)).unwrap(),
            "\"inf\""
        );
        let b: Bound = serde_json::from_str("\"inf\"").unwrap();
        assert!(b.0.is_infinite());
        let b: Bound = serde_json::from_str("3.25").unwrap();
        assert_eq!(b.0, 3.25);
        assert!(serde_json::from_str::<Bound>("\"nan\"").is_err());
    }

    #[test]
    fn analyze_two_pole_report() {
        let f = two_pole_file();
        let report = analyze(f.path(), AnalyzeOptions::default()).unwrap();
        assert_eq!(report.metadata.poles, 2);
        assert!((report.spectral.lambda_star - 0.5).abs() < 1e-10);
        assert!((report.spectral.t_rel.0 - 2.0).abs() < 1e-9);
        assert_eq!(report.spectral.f_value, None);
        assert_eq!(report.times.len(), 2);
        assert!((report.times[0].t - 2.0).abs() < 1e-12);
        // P1, P2 communicate; FE is its own closed component.
        assert_eq!(report.components.len(), 2);
        assert_eq!(report.components[0].members, vec!["P1", "P2"]);
        assert_eq!(report.components[1].members, vec!["FE"]);
        assert!(report.components[1].closed);
        assert!(!report.components[0].closed);
    }

    #[test]
    fn report_round_trips_through_json() {
        let f = two_pole_file();
        let report = analyze(f.path(), AnalyzeOptions::default()).unwrap();
        let json = to_json_pretty(&report);
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn dot_output_two_pole() {
        let f = two_pole_file();
        // Fair threshold on 3 states = 1/3; keep pole self-loops.
        let dot = graph_dot(
            f.path(),
            GraphOptions {
                self_loops: true,
                ..Default::default()
            },
        )
        .unwrap();
        let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges.len(), 4, "dot:\n{dot}");
        assert!(dot.contains("\"P1\" -> \"P2\" [label=\"0.400000\"]"));
        assert!(dot.contains("\"P2\" -> \"P2\" [label=\"0.400000\"]"));
        assert!(dot.contains("\"P1\" -> \"FE\" [label=\"0.500000\"]"));
        assert!(dot.contains("\"P2\" -> \"FE\" [label=\"0.500000\"]"));
        assert!(!dot.contains("\"FE\" ->"));

        // Default drops the pole self-loop as well.
        let dot = graph_dot(f.path(), GraphOptions::default()).unwrap();
        let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges.len(), 3);
        assert!(!dot.contains("\"P2\" -> \"P2\""));
    }

    #[test]
    fn dot_threshold_one_keeps_nodes_only() {
        let f = two_pole_file();
        let dot = graph_dot(
            f.path(),
            GraphOptions {
                threshold: ThresholdSpec::Value(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!dot.contains("->"));
        assert!(dot.contains("\"P1\""));
        assert!(dot.contains("\"FE\""));
    }

    #[test]
    fn threshold_parsing() {
        assert_eq!("fair".parse::<ThresholdSpec>().unwrap(), ThresholdSpec::Fair);
        assert_eq!(
            "0.25".parse::<ThresholdSpec>().unwrap(),
            ThresholdSpec::Value(0.25)
        );
        assert!("abc".parse::<ThresholdSpec>().is_err());
    }

    #[test]
    fn analyze_missing_file_is_io_error() {
        let err = analyze(Path::new("/nonexistent/table.csv"), AnalyzeOptions::default())
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn analyze_non_productive_economy_is_numerical_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"pole,A,B,Y\nA,0.5,0.5,0\nB,0.5,0.5,0\n")
            .unwrap();
        let err = analyze(f.path(), AnalyzeOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn summary_rows_round_trip() {
        let row = PanelRow {
            country: "MOR".into(),
            growth_rate: 4.536,
            lambda_star: 0.2939,
            t_rel: 1.4163,
            node_max: 0.9112,
            node_mean: 0.3082,
            node_min: 0.0,
            f_value: 0.480459,
            max_t: 2.83355,
            argmax_t: "D09".into(),
            min_t: 1.0,
            argmin_t: "D97T98".into(),
        };
        let csv = summary_csv(std::slice::from_ref(&row));
        let back = parse_summary_rows(csv.as_bytes()).unwrap();
        assert_eq!(back, vec![row]);
    }
}
