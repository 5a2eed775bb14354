use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// The single result of a command, in text and JSON form.
#[derive(Debug, Serialize)]
pub struct Verdict {
    pub schema: u32,
    pub command: Vec<String>,
    pub result: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Only reported for probabilistic systems.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_limited: Option<bool>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Equivalent,
    Inequivalent,
    Partition { classes: Vec<Vec<String>> },
    System { format: &'static str, text: String },
    Traces { words: Vec<String> },
    FuzzReport(FuzzSummary),
}

#[derive(Debug, Serialize)]
pub struct FuzzSummary {
    pub instance: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub skipped: usize,
    pub success: bool,
    pub report: String,
}

#[derive(Debug, Serialize)]
struct Failure<'a> {
    schema: u32,
    command: &'a [String],
    error: &'a str,
}

impl Verdict {
    pub fn new(command: Vec<String>, result: Outcome) -> Self {
        Verdict { schema: SCHEMA, command, result, witness: None, depth_limited: None }
    }

    pub fn with_witness(mut self, witness: Option<String>) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_depth_limited(mut self, limited: bool) -> Self {
        self.depth_limited = Some(limited);
        self
    }

    /// 0 on success, 1 on a negative verdict, 3 when that verdict may be an
    /// artefact of the depth bound.
    pub fn exit_code(&self) -> u8 {
        match &self.result {
            Outcome::Inequivalent if self.depth_limited == Some(true) => 3,
            Outcome::Inequivalent => 1,
            Outcome::FuzzReport(f) if !f.success => 1,
            _ => 0,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.result {
            Outcome::Equivalent => out.push_str("equivalent\n"),
            Outcome::Inequivalent if self.depth_limited == Some(true) => out.push_str("inequivalent (depth-limited)\n"),
            Outcome::Inequivalent => out.push_str("inequivalent\n"),
            Outcome::Partition { classes } => {
                if self.depth_limited == Some(true) {
                    out.push_str("# depth-limited\n");
                }
                for (i, class) in classes.iter().enumerate() {
                    out.push_str(&format!("class {i}: {}\n", class.join(" ")));
                }
            }
            Outcome::System { text, .. } => out.push_str(text),
            Outcome::Traces { words } => {
                for w in words {
                    out.push_str(w);
                    out.push('\n');
                }
            }
            Outcome::FuzzReport(f) => {
                out.push_str(&f.report);
                out.push('\n');
            }
        }
        if let Some(w) = &self.witness {
            out.push_str(&format!("witness: {w}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialise") + "\n"
    }
}

pub fn error_json(command: &[String], error: &str) -> String {
    serde_json::to_string_pretty(&Failure { schema: SCHEMA, command, error }).expect("errors serialise") + "\n"
}
