//! Result persistence: CSV (and optional JSON-lines mirror) with
//! round-trip-exact float formatting, plus the run manifest and the replay
//! comparator.
//!
//! Determinism contract: identical config + seeds produce byte-identical
//! output on the same build, except for the `wall_ns` column (a timing
//! measurement). Replay comparison therefore checks every numeric column at
//! 0 ULP and skips `wall_ns`.

use std::fmt::Write as _;

use serde_json::{json, Value};

/// Column order is part of the output contract.
pub const COLUMNS: [&str; 18] = [
    "algorithm",
    "adversary",
    "d1",
    "d2",
    "T",
    "seed",
    "t",
    "payoff",
    "cum_payoff",
    "ne_regret_running",
    "row_regret",
    "col_regret",
    "gap",
    "ne_regret",
    "ne_regret_mixed",
    "ne_regret_restricted",
    "wall_ns",
    "status",
];

/// Columns compared bit-exactly by replay (wall_ns is excluded).
pub const REPLAY_SKIP_COLUMN: &str = "wall_ns";

#[derive(Debug, Clone)]
pub struct OutputRow {
    pub algorithm: String,
    pub adversary: String,
    pub d1: usize,
    pub d2: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Round index; `None` marks the cell's final summary row.
    pub t: Option<usize>,
    pub payoff: Option<f64>,
    pub cum_payoff: Option<f64>,
    pub ne_regret_running: Option<f64>,
    pub row_regret: Option<f64>,
    pub col_regret: Option<f64>,
    pub gap: Option<f64>,
    pub ne_regret: Option<f64>,
    pub ne_regret_mixed: Option<f64>,
    pub ne_regret_restricted: Option<f64>,
    pub wall_ns: Option<u128>,
    pub status: Option<String>,
}

fn fmt_f64(v: Option<f64>) -> String {
    // `{}` prints the shortest digit string that round-trips, so equal bits
    // in means equal bytes out.
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

impl OutputRow {
    pub fn csv_line(&self) -> String {
        let fields = [
            self.algorithm.clone(),
            self.adversary.clone(),
            self.d1.to_string(),
            self.d2.to_string(),
            self.horizon.to_string(),
            self.seed.to_string(),
            self.t.map(|t| t.to_string()).unwrap_or_default(),
            fmt_f64(self.payoff),
            fmt_f64(self.cum_payoff),
            fmt_f64(self.ne_regret_running),
            fmt_f64(self.row_regret),
            fmt_f64(self.col_regret),
            fmt_f64(self.gap),
            fmt_f64(self.ne_regret),
            fmt_f64(self.ne_regret_mixed),
            fmt_f64(self.ne_regret_restricted),
            self.wall_ns.map(|w| w.to_string()).unwrap_or_default(),
            self.status.clone().unwrap_or_default(),
        ];
        let mut line = String::new();
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", csv_escape(f));
        }
        line
    }

    pub fn json_value(&self) -> Value {
        fn num(v: Option<f64>) -> Value {
            v.map(|x| json!(x)).unwrap_or(Value::Null)
        }
        json!({
            "algorithm": self.algorithm,
            "adversary": self.adversary,
            "d1": self.d1,
            "d2": self.d2,
            "T": self.horizon,
            "seed": self.seed,
            "t": self.t.map(|t| json!(t)).unwrap_or(Value::Null),
            "payoff": num(self.payoff),
            "cum_payoff": num(self.cum_payoff),
            "ne_regret_running": num(self.ne_regret_running),
            "row_regret": num(self.row_regret),
            "col_regret": num(self.col_regret),
            "gap": num(self.gap),
            "ne_regret": num(self.ne_regret),
            "ne_regret_mixed": num(self.ne_regret_mixed),
            "ne_regret_restricted": num(self.ne_regret_restricted),
            "wall_ns": self.wall_ns.map(|w| json!(w as u64)).unwrap_or(Value::Null),
            "status": self.status.clone().map(Value::String).unwrap_or(Value::Null),
        })
    }
}

pub fn csv_header() -> String {
    COLUMNS.join(",")
}

/// Split one CSV line on the same minimal quoting `csv_escape` produces.
pub fn csv_split(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' if cur.is_empty() && !quoted => quoted = true,
            ',' if !quoted => {
                fields.push(std::mem::take(&mut cur));
            }
            c => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_the_csv() {
        let row = OutputRow {
            algorithm: "omg_rftl".into(),
            adversary: "fixed".into(),
            d1: 2,
            d2: 2,
            horizon: 8,
            seed: 1,
            t: Some(3),
            payoff: Some(0.1 + 0.2),
            cum_payoff: Some(-1.0 / 3.0),
            ne_regret_running: None,
            row_regret: Some(1e-17),
            col_regret: Some(f64::MIN_POSITIVE),
            gap: Some(0.0),
            ne_regret: None,
            ne_regret_mixed: None,
            ne_regret_restricted: None,
            wall_ns: None,
            status: None,
        };
        let fields = csv_split(&row.csv_line());
        assert_eq!(fields.len(), COLUMNS.len());
        assert_eq!(fields[7].parse::<f64>().unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(fields[8].parse::<f64>().unwrap().to_bits(), (-1.0f64 / 3.0).to_bits());
        assert_eq!(fields[10].parse::<f64>().unwrap().to_bits(), 1e-17f64.to_bits());
        assert_eq!(fields[11].parse::<f64>().unwrap().to_bits(), f64::MIN_POSITIVE.to_bits());
    }

    #[test]
    fn csv_escaping_round_trips() {
        let line = format!("a,{},c", csv_escape("failed: bad, \"quoted\" thing"));
        let fields = csv_split(&line);
        assert_eq!(fields, vec!["a", "failed: bad, \"quoted\" thing", "c"]);
    }
}
