//! Cross-country panel statistics: Pearson correlation, two-sided Student-t
//! significance, and the panel correlation matrix with outlier exclusion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("series is constant, correlation undefined")]
    ConstantSeries,
    #[error("invalid input: {0}")]
    DegenerateInput(String),
}

/// Sample Pearson correlation coefficient of two equal-length series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: n });
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    // Rounding can push a collinear sample one ulp past unity.
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `ln Gamma(z)` for positive `z`, Lanczos approximation.
fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut sum = 1.000_000_000_190_015;
    for (i, c) in COEFFS.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.506_628_274_631_000_5 * sum / z).ln()
}

/// Regularized incomplete beta function `I_x(a, b)` by Lentz continued
/// fraction; absolute accuracy around `1e-14` on the unit interval.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    // Symmetry keeps the continued fraction in its fast-converging region.
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - reg_inc_beta(1.0 - x, b, a);
    }
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta).exp();

    const TINY: f64 = 1e-30;
    const EPS: f64 = 1e-15;
    let mut c = 1.0f64;
    let mut d = 0.0f64;
    let mut f = 1.0f64;
    let step = |coef: f64, c: &mut f64, d: &mut f64| -> f64 {
        *d = 1.0 + coef * *d;
        if d.abs() < TINY {
            *d = TINY;
        }
        *d = 1.0 / *d;
        *c = 1.0 + coef / *c;
        if c.abs() < TINY {
            *c = TINY;
        }
        *c * *d
    };
    for m in 0..300 {
        let mf = m as f64;
        let odd = -(a + mf) * (a + b + mf) * x / ((a + 2.0 * mf) * (a + 2.0 * mf + 1.0));
        let delta = step(odd, &mut c, &mut d);
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
        let even = (mf + 1.0) * (b - mf - 1.0) * x / ((a + 2.0 * mf + 1.0) * (a + 2.0 * mf + 2.0));
        let delta = step(even, &mut c, &mut d);
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    front / (f * a)
}

/// Student-t cumulative distribution with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if t == 0.0 {
        return 0.5;
    }
    let x = df / (df + t * t);
    let tail = 0.5 * reg_inc_beta(x, 0.5 * df, 0.5);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided significance of a sample correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub p: f64,
    /// True when `|r| = 1` forced `p = 0` by convention.
    pub degenerate: bool,
}

/// Two-sided p-value of `t = r sqrt((n-2) / (1-r^2))` against Student-t with
/// `n - 2` degrees of freedom.
pub fn t_test_p(r: f64, n: usize) -> Result<PValue, StatsError> {
    if n < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: n });
    }
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(StatsError::DegenerateInput(format!(
            "correlation {r} outside [-1, 1]"
        )));
    }
    if (r.abs() - 1.0).abs() < f64::EPSILON {
        return Ok(PValue {
            p: 0.0,
            degenerate: true,
        });
    }
    let df = (n - 2) as f64;
    // p = I_x(df/2, 1/2) with x = df / (df + t^2) collapses both tails.
    let t2 = r * r * df / (1.0 - r * r);
    let p = reg_inc_beta(df / (df + t2), 0.5 * df, 0.5);
    Ok(PValue {
        p,
        degenerate: false,
    })
}

/// Per-country summary row of the benchmark panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub country: String,
    /// Exogenous growth rate in percent, never derived from the table.
    pub growth_rate: f64,
    pub lambda_star: f64,
    pub t_rel: f64,
    /// Largest retained share `1 - y` (transformation pole).
    pub node_max: f64,
    pub node_mean: f64,
    /// Smallest retained share `1 - y` (outlet pole).
    pub node_min: f64,
    pub f_value: f64,
    pub max_t: f64,
    pub argmax_t: String,
    pub min_t: f64,
    pub argmin_t: String,
}

impl PanelRow {
    /// Consistency diagnostics; published tables round inconsistently, so
    /// violations warn instead of failing.
    pub fn validate(&self) -> Vec<String> {
        let mut notes = Vec::new();
        let t_rel = 1.0 / (1.0 - self.lambda_star);
        if (t_rel - self.t_rel).abs() > 5e-4 {
            notes.push(format!(
                "{}: t_rel {} disagrees with 1/(1-lambda) = {t_rel:.5}",
                self.country, self.t_rel
            ));
        }
        if self.lambda_star < self.node_min || self.lambda_star > self.node_max {
            notes.push(format!(
                "{}: lambda {} outside node interval [{}, {}]",
                self.country, self.lambda_star, self.node_min, self.node_max
            ));
        }
        notes
    }
}

/// Numeric panel fields available for correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PanelField {
    GrowthRate,
    LambdaStar,
    TRel,
    NodeMax,
    NodeMean,
    NodeMin,
    FValue,
    MaxT,
    MinT,
}

impl PanelField {
    pub fn value(self, row: &PanelRow) -> f64 {
        match self {
            PanelField::GrowthRate => row.growth_rate,
            PanelField::LambdaStar => row.lambda_star,
            PanelField::TRel => row.t_rel,
            PanelField::NodeMax => row.node_max,
            PanelField::NodeMean => row.node_mean,
            PanelField::NodeMin => row.node_min,
            PanelField::FValue => row.f_value,
            PanelField::MaxT => row.max_t,
            PanelField::MinT => row.min_t,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PanelField::GrowthRate => "growth_rate",
            PanelField::LambdaStar => "lambda_star",
            PanelField::TRel => "t_rel",
            PanelField::NodeMax => "node_max",
            PanelField::NodeMean => "node_mean",
            PanelField::NodeMin => "node_min",
            PanelField::FValue => "f_value",
            PanelField::MaxT => "max_t",
            PanelField::MinT => "min_t",
        }
    }
}

/// One cell of the correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    /// p forced to zero by `|r| = 1`.
    pub degenerate: bool,
}

/// Symmetric correlation matrix over a field selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub fields: Vec<PanelField>,
    pub cells: Vec<CorrelationCell>,
}

impl CorrelationMatrix {
    pub fn cell(&self, i: usize, j: usize) -> &CorrelationCell {
        &self.cells[i * self.fields.len() + j]
    }
}

/// Correlates the selected fields over the panel, excluding the listed
/// country codes first.
pub fn panel_correlate(
    rows: &[PanelRow],
    fields: &[PanelField],
    exclude: &[String],
) -> Result<CorrelationMatrix, StatsError> {
    let kept: Vec<&PanelRow> = rows
        .iter()
        .filter(|r| !exclude.iter().any(|e| e == &r.country))
        .collect();
    if kept.len() < 3 {
        return Err(StatsError::TooFewPoints {
            needed: 3,
            got: kept.len(),
        });
    }
    let k = fields.len();
    let series: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| kept.iter().map(|r| f.value(r)).collect())
        .collect();
    let mut cells = vec![
        CorrelationCell {
            r: 0.0,
            p_value: 0.0,
            n: kept.len(),
            degenerate: false,
        };
        k * k
    ];
    for i in 0..k {
        cells[i * k + i] = CorrelationCell {
            r: 1.0,
            p_value: 0.0,
            n: kept.len(),
            degenerate: true,
        };
        for j in (i + 1)..k {
            let r = pearson(&series[i], &series[j])?;
            let p = t_test_p(r, kept.len())?;
            let cell = CorrelationCell {
                r,
                p_value: p.p,
                n: kept.len(),
                degenerate: p.degenerate,
            };
            cells[i * k + j] = cell.clone();
            cells[j * k + i] = cell;
        }
    }
    Ok(CorrelationMatrix {
        fields: fields.to_vec(),
        cells,
    })
}
