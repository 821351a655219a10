//! Flow-table ingestion and coefficient construction: CSV parsing with
//! accounting validation, technical/trade coefficient matrices, the monetary
//! dual, and the augmented absorbing-chain forms.

use crate::matrix::{classify_stochasticity, Axis, Matrix, MatrixError, STOCHASTIC_TOL};
use std::io::Read;
use thiserror::Error;

/// Relative tolerance for clamping tiny negative cells picked up in parsing.
const NEGATIVE_CLAMP_REL: f64 = 1e-9;
/// Relative tolerance for cross-checking a parsed value-added row.
const VALUE_ADDED_REL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("cell at row {row:?}, column {col:?} is not numeric: {value:?}")]
    NonNumeric {
        row: String,
        col: String,
        value: String,
    },
    #[error("expected {expected} data rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("row {row:?} has {got} cells, expected {expected}")]
    CellCount {
        row: String,
        expected: usize,
        got: usize,
    },
    #[error("row {position} is labeled {got:?} but the header lists {expected:?}")]
    RowCodeMismatch {
        position: usize,
        expected: String,
        got: String,
    },
    #[error("duplicate pole code {code:?}")]
    DuplicatePole { code: String },
    #[error("negative flow {value} from {row:?} to {col:?}")]
    NegativeFlow {
        row: String,
        col: String,
        value: f64,
    },
    #[error("negative final demand {value} for pole {pole:?}")]
    NegativeFinalDemand { pole: String, value: f64 },
    #[error("derived value added for pole {pole:?} is negative ({value}): inputs exceed output")]
    NegativeValueAdded { pole: String, value: f64 },
    #[error("pole {pole:?} has zero output; pass the removal flag to drop it")]
    ZeroOutputPole { pole: String },
    #[error("value-added row disagrees for pole {pole:?}: parsed {parsed}, derived {derived}")]
    ValueAddedMismatch {
        pole: String,
        parsed: f64,
        derived: f64,
    },
    #[error("table has no poles left after validation")]
    NoPoles,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Parse-time options.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Transpose the flow matrix on ingest (for column-major sources).
    pub transpose: bool,
    /// Drop zero-output poles with a warning instead of failing.
    pub drop_zero_output: bool,
}

/// Validated inter-industry flow table.
///
/// Rows are suppliers, columns users: `flows[i][j]` is the delivery from pole
/// `i` to pole `j`. Output and value added are derived from the accounting
/// identities and always satisfy them.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTable {
    pub poles: Vec<String>,
    pub flows: Matrix,
    pub final_demand: Vec<f64>,
    pub value_added: Vec<f64>,
    pub output: Vec<f64>,
    pub diagnostics: Vec<String>,
}

impl FlowTable {
    /// Builds and validates a table from in-memory parts. `parsed_value_added`
    /// is cross-checked against the derived vector, never trusted.
    pub fn from_parts(
        poles: Vec<String>,
        flows: Matrix,
        final_demand: Vec<f64>,
        parsed_value_added: Option<Vec<f64>>,
        options: ParseOptions,
    ) -> Result<Self, TableError> {
        let n = poles.len();
        if n == 0 {
            return Err(TableError::NoPoles);
        }
        if flows.rows() != n || flows.cols() != n || final_demand.len() != n {
            return Err(TableError::Header(format!(
                "flows must be {n}x{n} with {n} final-demand entries"
            )));
        }
        if let Some(w) = &parsed_value_added {
            if w.len() != n {
                return Err(TableError::Header(format!(
                    "value-added row has {} cells, expected {n}",
                    w.len()
                )));
            }
        }
        {
            let mut seen = std::collections::HashSet::new();
            for code in &poles {
                if !seen.insert(code.as_str()) {
                    return Err(TableError::DuplicatePole { code: code.clone() });
                }
            }
        }

        let mut flows = if options.transpose {
            flows.transpose()
        } else {
            flows
        };
        let mut final_demand = final_demand;
        let mut diagnostics = Vec::new();

        // Clamp parse noise, reject genuine negatives.
        let scale = flows.max_abs().max(
            final_demand
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs())),
        );
        let clamp_tol = NEGATIVE_CLAMP_REL * scale;
        for i in 0..n {
            for j in 0..n {
                let v = flows.get(i, j);
                if v < 0.0 {
                    if v >= -clamp_tol {
                        flows.set(i, j, 0.0);
                        diagnostics.push(format!(
                            "clamped near-zero negative flow {v:e} from {} to {}",
                            poles[i], poles[j]
                        ));
                    } else {
                        return Err(TableError::NegativeFlow {
                            row: poles[i].clone(),
                            col: poles[j].clone(),
                            value: v,
                        });
                    }
                }
            }
        }
        for (i, y) in final_demand.iter_mut().enumerate() {
            if *y < 0.0 {
                if *y >= -clamp_tol {
                    diagnostics.push(format!(
                        "clamped near-zero negative final demand {:e} for {}",
                        *y, poles[i]
                    ));
                    *y = 0.0;
                } else {
                    return Err(TableError::NegativeFinalDemand {
                        pole: poles[i].clone(),
                        value: *y,
                    });
                }
            }
        }

        // Row identity X_i = sum_j x_ij + Y_i defines output.
        let output: Vec<f64> = flows
            .row_sums()
            .iter()
            .zip(&final_demand)
            .map(|(s, y)| s + y)
            .collect();

        // Zero-output poles: removable only when row and column are both
        // empty, which X_i = 0 plus the value-added sign check guarantees.
        let dead: Vec<usize> = (0..n).filter(|&i| output[i] <= 0.0).collect();
        if !dead.is_empty() && !options.drop_zero_output {
            return Err(TableError::ZeroOutputPole {
                pole: poles[dead[0]].clone(),
            });
        }
        let (poles, flows, final_demand, output, parsed_value_added) = if dead.is_empty() {
            (poles, flows, final_demand, output, parsed_value_added)
        } else {
            for &i in &dead {
                let col_in: f64 = (0..n).map(|r| flows.get(r, i)).sum();
                if col_in > 0.0 {
                    return Err(TableError::NegativeValueAdded {
                        pole: poles[i].clone(),
                        value: -col_in,
                    });
                }
                diagnostics.push(format!("dropped zero-output pole {}", poles[i]));
            }
            let keep: Vec<usize> = (0..n).filter(|i| !dead.contains(i)).collect();
            if keep.is_empty() {
                return Err(TableError::NoPoles);
            }
            let mut sub = Matrix::zeros(keep.len(), keep.len());
            for (a, &i) in keep.iter().enumerate() {
                for (b, &j) in keep.iter().enumerate() {
                    sub.set(a, b, flows.get(i, j));
                }
            }
            (
                keep.iter().map(|&i| poles[i].clone()).collect(),
                sub,
                keep.iter().map(|&i| final_demand[i]).collect(),
                keep.iter().map(|&i| output[i]).collect(),
                parsed_value_added.map(|w| keep.iter().map(|&i| w[i]).collect()),
            )
        };
        let n = poles.len();

        // Column identity X_j = sum_i x_ij + W_j defines value added.
        let col_sums = flows.col_sums();
        let mut value_added = Vec::with_capacity(n);
        for j in 0..n {
            let w = output[j] - col_sums[j];
            if w < 0.0 {
                if w >= -clamp_tol.max(NEGATIVE_CLAMP_REL * output[j]) {
                    diagnostics.push(format!(
                        "clamped near-zero negative value added {w:e} for {}",
                        poles[j]
                    ));
                    value_added.push(0.0);
                } else {
                    return Err(TableError::NegativeValueAdded {
                        pole: poles[j].clone(),
                        value: w,
                    });
                }
            } else {
                value_added.push(w);
            }
        }

        if let Some(parsed) = parsed_value_added {
            for j in 0..n {
                let derived = value_added[j];
                let tol = VALUE_ADDED_REL_TOL * derived.abs().max(parsed[j].abs()).max(1.0);
                if (parsed[j] - derived).abs() > tol {
                    return Err(TableError::ValueAddedMismatch {
                        pole: poles[j].clone(),
                        parsed: parsed[j],
                        derived,
                    });
                }
            }
        }

        Ok(FlowTable {
            poles,
            flows,
            final_demand,
            value_added,
            output,
            diagnostics,
        })
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn pole_index(&self, code: &str) -> Option<usize> {
        self.poles.iter().position(|p| p == code)
    }

    /// Serializes back to the input CSV format, value-added row included.
    pub fn to_csv(&self) -> String {
        let n = self.pole_count();
        let mut out = String::from("pole");
        for p in &self.poles {
            out.push(',');
            out.push_str(p);
        }
        out.push_str(",Y\n");
        for i in 0..n {
            out.push_str(&self.poles[i]);
            for j in 0..n {
                out.push_str(&format!(",{}", self.flows.get(i, j)));
            }
            out.push_str(&format!(",{}\n", self.final_demand[i]));
        }
        out.push('W');
        for w in &self.value_added {
            out.push_str(&format!(",{w}"));
        }
        out.push('\n');
        out
    }
}

/// Parses a flow table from CSV:
///
/// ```text
/// pole,<code_1>,...,<code_n>,Y
/// <code_i>,x_i1,...,x_in,Y_i      (n rows, in header order)
/// W,w_1,...,w_n                   (optional; trailing Y cell empty or absent)
/// ```
pub fn parse_flow_table(source: impl Read, options: ParseOptions) -> Result<FlowTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(TableError::Header("empty input".into()));
    }

    let header = &records[0];
    if header.len() < 3 {
        return Err(TableError::Header(
            "header needs at least pole,<code>,Y".into(),
        ));
    }
    if !header[0].eq_ignore_ascii_case("pole") {
        return Err(TableError::Header(format!(
            "header must start with 'pole', got {:?}",
            &header[0]
        )));
    }
    if !header[header.len() - 1].eq_ignore_ascii_case("y") {
        return Err(TableError::Header(format!(
            "header must end with 'Y', got {:?}",
            &header[header.len() - 1]
        )));
    }
    let codes: Vec<String> = header
        .iter()
        .skip(1)
        .take(header.len() - 2)
        .map(str::to_string)
        .collect();
    let n = codes.len();

    let body = &records[1..];
    let has_w_row = body
        .last()
        .map(|r| r.get(0).is_some_and(|c| c.eq_ignore_ascii_case("w")))
        .unwrap_or(false);
    let data_rows = if has_w_row { &body[..body.len() - 1] } else { body };
    if data_rows.len() != n {
        return Err(TableError::RowCount {
            expected: n,
            got: data_rows.len(),
        });
    }

    let parse_cell = |row: &str, col: &str, raw: &str| -> Result<f64, TableError> {
        raw.parse::<f64>().map_err(|_| TableError::NonNumeric {
            row: row.to_string(),
            col: col.to_string(),
            value: raw.to_string(),
        })
    };

    let mut flows = Matrix::zeros(n, n);
    let mut final_demand = vec![0.0; n];
    for (i, rec) in data_rows.iter().enumerate() {
        if rec.len() != n + 2 {
            return Err(TableError::CellCount {
                row: rec.get(0).unwrap_or("?").to_string(),
                expected: n + 2,
                got: rec.len(),
            });
        }
        let code = &rec[0];
        if code != codes[i] {
            return Err(TableError::RowCodeMismatch {
                position: i + 1,
                expected: codes[i].clone(),
                got: code.to_string(),
            });
        }
        for j in 0..n {
            flows.set(i, j, parse_cell(code, &codes[j], &rec[j + 1])?);
        }
        final_demand[i] = parse_cell(code, "Y", &rec[n + 1])?;
    }

    let parsed_w = if has_w_row {
        let rec = body.last().unwrap();
        let trailing_empty = rec.len() == n + 2 && rec[n + 1].is_empty();
        if !(rec.len() == n + 1 || trailing_empty) {
            return Err(TableError::CellCount {
                row: "W".into(),
                expected: n + 1,
                got: rec.len(),
            });
        }
        let mut w = Vec::with_capacity(n);
        for j in 0..n {
            w.push(parse_cell("W", &codes[j], &rec[j + 1])?);
        }
        Some(w)
    } else {
        None
    };

    FlowTable::from_parts(codes, flows, final_demand, parsed_w, options)
}

/// Technical and trade coefficients with the derived rate vectors and the
/// monetary dual `G = Theta^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub poles: Vec<String>,
    /// Technical coefficients: `theta[i][j] = x_ij / X_j` (column-substochastic).
    pub theta: Matrix,
    /// Trade coefficients: `alpha[i][j] = x_ij / X_i` (row-substochastic).
    pub alpha: Matrix,
    /// Monetary supply coefficients `G = Theta^T` (row-substochastic).
    pub g: Matrix,
    /// Value-added rates `W_j / X_j`.
    pub w_rates: Vec<f64>,
    /// Final-demand rates `Y_i / X_i`.
    pub y_rates: Vec<f64>,
}

impl CoefficientSet {
    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }
}

/// Derives the coefficient matrices of a validated table.
pub fn coefficients(table: &FlowTable) -> CoefficientSet {
    let n = table.pole_count();
    let mut theta = Matrix::zeros(n, n);
    let mut alpha = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let x = table.flows.get(i, j);
            theta.set(i, j, x / table.output[j]);
            alpha.set(i, j, x / table.output[i]);
        }
    }
    let g = theta.transpose();
    let w_rates: Vec<f64> = table
        .value_added
        .iter()
        .zip(&table.output)
        .map(|(w, x)| w / x)
        .collect();
    let y_rates: Vec<f64> = table
        .final_demand
        .iter()
        .zip(&table.output)
        .map(|(y, x)| y / x)
        .collect();

    debug_assert!(
        classify_stochasticity(&theta, STOCHASTIC_TOL, Axis::Cols).is_substochastic(),
        "theta must be column-substochastic"
    );
    debug_assert!(
        classify_stochasticity(&alpha, STOCHASTIC_TOL, Axis::Rows).is_substochastic(),
        "alpha must be row-substochastic"
    );

    CoefficientSet {
        poles: table.poles.clone(),
        theta,
        alpha,
        g,
        w_rates,
        y_rates,
    }
}

/// Reading direction of the augmented chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Demand reading: transition `[[Theta^T, w], [0, 1]]`, absorption into
    /// added value.
    Direct,
    /// Supply reading: transition `[[A, y], [0, 1]]`, absorption into final
    /// expenditure.
    Indirect,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Direct => "direct",
            Orientation::Indirect => "indirect",
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Orientation::Direct),
            "indirect" => Ok(Orientation::Indirect),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

/// Row-stochastic absorbing chain on `n + 1` states: the poles plus one
/// absorbing state collecting final expenditure (indirect) or added value
/// (direct).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedChain {
    pub transition: Matrix,
    pub orientation: Orientation,
    /// Index of the appended absorbing state (always `n`).
    pub absorbing_index: usize,
    /// Pole codes plus the absorbing-state label.
    pub labels: Vec<String>,
}

/// Embeds the coefficients into the `(n+1)`-state absorbing chain of the
/// requested orientation.
pub fn augment(c: &CoefficientSet, orientation: Orientation) -> AugmentedChain {
    let n = c.pole_count();
    let mut transition = Matrix::zeros(n + 1, n + 1);
    match orientation {
        Orientation::Indirect => {
            for i in 0..n {
                for j in 0..n {
                    transition.set(i, j, c.alpha.get(i, j));
                }
                transition.set(i, n, c.y_rates[i]);
            }
        }
        Orientation::Direct => {
            for i in 0..n {
                for j in 0..n {
                    transition.set(i, j, c.theta.get(j, i));
                }
                transition.set(i, n, c.w_rates[i]);
            }
        }
    }
    transition.set(n, n, 1.0);

    debug_assert!(transition
        .row_sums()
        .iter()
        .all(|s| (s - 1.0).abs() <= 1e-9));

    let mut labels = c.poles.clone();
    labels.push(
        match orientation {
            Orientation::Indirect => "FE",
            Orientation::Direct => "VA",
        }
        .to_string(),
    );
    AugmentedChain {
        transition,
        orientation,
        absorbing_index: n,
        labels,
    }
}
