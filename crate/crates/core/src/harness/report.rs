use std::fmt;
use std::time::Duration;

/// Which side of the bound the estimate must fall on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AtMost,
    AtLeast,
    /// Two-sided: within the margin of the reference value.
    Near,
}

impl Direction {
    fn symbol(self) -> &'static str {
        match self {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
            Direction::Near => "~=",
        }
    }
}

/// One comparison of an estimate against a bound with a `3·se + tol` margin.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub direction: Direction,
    /// Extra absolute slack for exact (non-sampled) comparisons.
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, estimate: f64, std_error: f64, bound: f64, direction: Direction) -> Self {
        Check::with_tolerance(name, estimate, std_error, bound, direction, 0.0)
    }

    pub fn exact(name: impl Into<String>, value: f64, bound: f64, direction: Direction, tolerance: f64) -> Self {
        Check::with_tolerance(name, value, 0.0, bound, direction, tolerance)
    }

    pub fn with_tolerance(
        name: impl Into<String>,
        estimate: f64,
        std_error: f64,
        bound: f64,
        direction: Direction,
        tolerance: f64,
    ) -> Self {
        let mut c = Check { name: name.into(), estimate, std_error, bound, direction, tolerance, passed: false };
        c.passed = c.verdict();
        c
    }

    /// Pass/fail recomputed from the stored fields.
    pub fn verdict(&self) -> bool {
        let margin = self.margin();
        match self.direction {
            Direction::AtMost => self.estimate <= self.bound + margin,
            Direction::AtLeast => self.estimate >= self.bound - margin,
            Direction::Near => (self.estimate - self.bound).abs() <= margin,
        }
    }

    pub fn margin(&self) -> f64 {
        3.0 * self.std_error + self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<44} {:>10.6} ± {:<9.6} {} {:<10.6} (margin {:.6})  {}",
            self.name,
            self.estimate,
            self.std_error,
            self.direction.symbol(),
            self.bound,
            self.margin(),
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub trials: u64,
    pub seed: u64,
    pub runtime: Duration,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>, trials: u64, seed: u64) -> Self {
        ExperimentReport { id: id.into(), trials, seed, runtime: Duration::ZERO, checks: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// True when every stored verdict matches a recomputation from its fields.
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.passed == c.verdict())
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// One `key=value` line per check, for machine consumption.
    pub fn records(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "experiment={} check={:?} trials={} seed={} estimate={:e} se={:e} bound={:e} direction={:?} tol={:e} passed={}",
                    self.id,
                    c.name,
                    self.trials,
                    self.seed,
                    c.estimate,
                    c.std_error,
                    c.bound,
                    c.direction,
                    c.tolerance,
                    c.passed
                )
            })
            .collect()
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "experiment {}: trials={} seed={} runtime={:.2?}",
            self.id, self.trials, self.seed, self.runtime
        )?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}
