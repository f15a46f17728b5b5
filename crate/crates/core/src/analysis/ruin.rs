use super::{check_probability, AnalysisError};

/// Probability that a walk moving up with probability `up_p` and down
/// otherwise reaches `high` before `low`, starting at `start`.
pub fn gamblers_ruin_up_prob(
    up_p: f64,
    start: i64,
    low: i64,
    high: i64,
) -> Result<f64, AnalysisError> {
    check_probability("up_p", up_p)?;
    if !(low <= start && start <= high) || low == high {
        return Err(AnalysisError::InvalidArgument(format!(
            "need low <= start <= high with low < high, got {low} <= {start} <= {high}"
        )));
    }
    if start == high {
        return Ok(1.0);
    }
    if start == low {
        return Ok(0.0);
    }
    let a = (start - low) as f64;
    let n = (high - low) as f64;
    if up_p == 1.0 {
        return Ok(1.0);
    }
    if up_p == 0.0 {
        return Ok(0.0);
    }
    if up_p == 0.5 {
        return Ok(a / n);
    }
    let ln_rho = ((1.0 - up_p) / up_p).ln();
    if ln_rho < 0.0 {
        // (1 - rho^a) / (1 - rho^n) with rho < 1
        Ok((a * ln_rho).exp_m1() / (n * ln_rho).exp_m1())
    } else {
        // Divide through by rho^n to keep the powers below one.
        Ok(((a - n) * ln_rho).exp() * (-a * ln_rho).exp_m1() / (-n * ln_rho).exp_m1())
    }
}

/// Nearest-neighbour chain on `low..=high`. `up[i]` and `down[i]` are the
/// move probabilities from state `low + i`; the remainder stays put. The
/// end states are absorbing whatever their entries say.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain {
    pub low: i64,
    pub high: i64,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl BirthDeathChain {
    pub fn new(low: i64, high: i64, up: Vec<f64>, down: Vec<f64>) -> Result<Self, AnalysisError> {
        if low >= high {
            return Err(AnalysisError::InvalidArgument(format!(
                "empty chain [{low}, {high}]"
            )));
        }
        let len = (high - low + 1) as usize;
        if up.len() != len || down.len() != len {
            return Err(AnalysisError::InvalidArgument(format!(
                "expected {len} transition entries"
            )));
        }
        for (&u, &d) in up.iter().zip(&down) {
            check_probability("up", u)?;
            check_probability("down", d)?;
            if u + d > 1.0 + 1e-12 {
                return Err(AnalysisError::InvalidArgument(format!(
                    "up + down = {} exceeds one",
                    u + d
                )));
            }
        }
        Ok(Self {
            low,
            high,
            up,
            down,
        })
    }

    /// Constant up probability, down otherwise.
    pub fn homogeneous(up_p: f64, low: i64, high: i64) -> Result<Self, AnalysisError> {
        let len = (high - low + 1).max(0) as usize;
        Self::new(low, high, vec![up_p; len], vec![1.0 - up_p; len])
    }
}

/// Probability of absorbing at `high` from `start`, by solving the
/// hitting-probability system with Gaussian elimination.
pub fn absorption_prob_solve(
    chain: &BirthDeathChain,
    low: i64,
    high: i64,
    start: i64,
) -> Result<f64, AnalysisError> {
    if low != chain.low || high != chain.high {
        return Err(AnalysisError::InvalidArgument(format!(
            "chain covers [{}, {}], asked for [{low}, {high}]",
            chain.low, chain.high
        )));
    }
    if !(low <= start && start <= high) {
        return Err(AnalysisError::InvalidArgument(format!(
            "start {start} outside [{low}, {high}]"
        )));
    }
    let n = (high - low + 1) as usize;
    // Row i: h_i - up_i h_{i+1} - down_i h_{i-1} - stay_i h_i = 0
    let mut a = vec![vec![0.0; n + 1]; n];
    a[0][0] = 1.0;
    a[n - 1][n - 1] = 1.0;
    a[n - 1][n] = 1.0;
    for i in 1..n - 1 {
        a[i][i] = chain.up[i] + chain.down[i];
        a[i][i + 1] = -chain.up[i];
        a[i][i - 1] = -chain.down[i];
    }
    let h = gaussian_solve(a)?;
    Ok(h[(start - low) as usize])
}

/// Solves an augmented `n x (n+1)` system with partial pivoting.
fn gaussian_solve(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>, AnalysisError> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-14 {
            return Err(AnalysisError::Singular(col));
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (x, &p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= factor * p;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    Ok(x)
}
