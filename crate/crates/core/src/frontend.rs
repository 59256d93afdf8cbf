//! The typechecking pipeline behind the `mttcheck` binary.
//!
//! A problem is a transducer with an input and an output type. Types are
//! read from bottom-up automaton files, tree grammars (`.rtg`, `.grammar`)
//! or unranked content schemas (`.schema`, encoded first-child/next-sibling).

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::alternating::{bta_to_ata, materialize, Alternating, Intersection, StateSet, StateSetPair};
use crate::automata::{determinize_complete_capped, Bta, Dbta};
use crate::emptiness::{preprocess, EmptinessChecker, EmptinessStats, Verdict};
use crate::error::{Error, Result};
use crate::inference::{infer_optimized, InferOptions};
use crate::oracle::{oracle_typecheck, OracleConfig, OracleVerdict};
use crate::reference::{classical_typecheck_capped, mps_domain_witness, mps_specialize};
use crate::schema::{decode_forest, encode_unranked, grammar_to_bta, ContentSchema, TreeGrammar};
use crate::transducer::Mtt;
use crate::trees::{RankedAlphabet, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Set-state inference, lazy intersection and top-down emptiness.
    #[default]
    Ours,
    /// Deterministic inference over functions, then bottom-up emptiness.
    Classical,
    /// Specialization of the transducer, then Horn-clause solving.
    Mps,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algorithm> {
        match s {
            "ours" => Ok(Algorithm::Ours),
            "classical" => Ok(Algorithm::Classical),
            "mps" => Ok(Algorithm::Mps),
            _ => Err(Error::UnknownName {
                name: s.to_string(),
                pos: None,
            }),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Ours => "ours",
            Algorithm::Classical => "classical",
            Algorithm::Mps => "mps",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub algorithm: Algorithm,
    pub infer: InferOptions,
    pub preprocess: bool,
    /// Cap on subsets, classical states and implication head sets.
    pub max_subsets: usize,
    /// Cross-check against exhaustive evaluation up to this many nodes.
    pub oracle_depth: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            algorithm: Algorithm::Ours,
            infer: InferOptions::default(),
            preprocess: true,
            max_subsets: 1 << 16,
            oracle_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TypeVerdict {
    #[serde(rename = "WELL-TYPED")]
    WellTyped,
    #[serde(rename = "ILL-TYPED")]
    IllTyped,
}

impl fmt::Display for TypeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeVerdict::WellTyped => "WELL-TYPED",
            TypeVerdict::IllTyped => "ILL-TYPED",
        })
    }
}

/// An input in the input type with at least one output outside the
/// output type.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub ranked: String,
    /// The unranked document, when the tree is an encoding of one.
    pub decoded: Option<String>,
    pub bad_output: String,
    #[serde(skip)]
    pub tree: Tree,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseTime {
    pub phase: &'static str,
    pub millis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionsEcho {
    pub algorithm: Algorithm,
    pub cartesian: bool,
    pub partition: bool,
    pub complement_output: bool,
    /// Whether the complement rule applied (it needs a total deterministic transducer).
    pub complement_active: bool,
    pub preprocess: bool,
    pub max_subsets: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub depth: usize,
    pub counterexample: Option<String>,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub verdict: TypeVerdict,
    pub witness: Option<Witness>,
    /// States of the automaton whose emptiness was decided: the
    /// intersected alternating automaton, the classical deterministic
    /// automaton, or the specialized procedures.
    pub ata_states_materialized: usize,
    pub output_dbta_states: usize,
    pub timings: Vec<PhaseTime>,
    pub options: OptionsEcho,
    pub emptiness: Option<EmptinessStats>,
    pub oracle: Option<OracleReport>,
}

impl RunReport {
    /// 0 for well-typed, 1 for ill-typed.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            TypeVerdict::WellTyped => 0,
            TypeVerdict::IllTyped => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// `WELL-TYPED`, or `ILL-TYPED witness=<tree>`.
    pub fn verdict_line(&self) -> String {
        match &self.witness {
            Some(w) => format!("{} witness={}", self.verdict, w.ranked),
            None => self.verdict.to_string(),
        }
    }
}

/// How a type file is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeFormat {
    Automaton,
    Grammar,
    ContentSchema,
}

impl TypeFormat {
    pub fn from_path(path: &Path) -> TypeFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("schema") => TypeFormat::ContentSchema,
            Some("rtg" | "grammar") => TypeFormat::Grammar,
            _ => TypeFormat::Automaton,
        }
    }
}

pub fn parse_type(text: &str, format: TypeFormat) -> Result<Bta> {
    match format {
        TypeFormat::Automaton => Bta::parse(text),
        TypeFormat::Grammar => grammar_to_bta(&TreeGrammar::parse(text)?),
        TypeFormat::ContentSchema => grammar_to_bta(&encode_unranked(&ContentSchema::parse(text)?)),
    }
}

/// A transducer and its two types over one common alphabet.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mtt: Mtt,
    pub in_type: Bta,
    pub out_type: Bta,
}

impl Problem {
    /// Widens all three components to the union of their alphabets.
    pub fn new(mtt: Mtt, in_type: Bta, out_type: Bta) -> Result<Problem> {
        let alphabet: RankedAlphabet = mtt
            .alphabet()
            .union(in_type.alphabet())?
            .union(out_type.alphabet())?;
        Ok(Problem {
            mtt: mtt.with_alphabet(&alphabet)?,
            in_type: in_type.with_alphabet(&alphabet)?,
            out_type: out_type.with_alphabet(&alphabet)?,
        })
    }

    pub fn load(mtt: &Path, in_type: &Path, out_type: &Path) -> Result<Problem> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
        };
        let m = Mtt::parse(&read(mtt)?)?;
        let i = parse_type(&read(in_type)?, TypeFormat::from_path(in_type))?;
        let o = parse_type(&read(out_type)?, TypeFormat::from_path(out_type))?;
        Problem::new(m, i, o)
    }

    /// Some output of `t` outside the output type, if `t` is a valid input.
    pub fn bad_output(&self, t: &Tree) -> Option<Tree> {
        if !self.in_type.in_language(t) {
            return None;
        }
        self.mtt.evaluate(t).into_iter().find(|u| !self.out_type.in_language(u))
    }
}

pub fn run_typecheck(mtt: &Path, in_type: &Path, out_type: &Path, options: &Options) -> Result<RunReport> {
    typecheck(&Problem::load(mtt, in_type, out_type)?, options)
}

struct Clock {
    at: Instant,
    phases: Vec<PhaseTime>,
}

impl Clock {
    fn new() -> Clock {
        Clock {
            at: Instant::now(),
            phases: Vec::new(),
        }
    }

    fn lap(&mut self, phase: &'static str) {
        let now = Instant::now();
        self.phases.push(PhaseTime {
            phase,
            millis: (now - self.at).as_secs_f64() * 1e3,
        });
        self.at = now;
    }
}

struct Outcome {
    witness: Option<Tree>,
    states: usize,
    complement_active: bool,
    emptiness: Option<EmptinessStats>,
}

pub fn typecheck(problem: &Problem, options: &Options) -> Result<RunReport> {
    let mut clock = Clock::new();
    let det = determinize_complete_capped(&problem.out_type, options.max_subsets)?;
    clock.lap("determinize");
    let out = &det.dbta;
    let outcome = match options.algorithm {
        Algorithm::Ours => run_ours(problem, out, options, &mut clock)?,
        Algorithm::Classical => run_classical(problem, out, options, &mut clock)?,
        Algorithm::Mps => run_mps(problem, out, options, &mut clock)?,
    };
    let witness = match outcome.witness {
        None => None,
        Some(t) => {
            let bad = problem
                .bad_output(&t)
                .ok_or_else(|| Error::InvalidWitness(t.to_string()))?;
            Some(Witness {
                ranked: t.to_string(),
                decoded: decode_document(&t),
                bad_output: bad.to_string(),
                tree: t,
            })
        }
    };
    clock.lap("validate");
    let verdict = if witness.is_some() {
        TypeVerdict::IllTyped
    } else {
        TypeVerdict::WellTyped
    };
    let oracle = options.oracle_depth.map(|depth| {
        let cfg = OracleConfig {
            max_nodes: depth,
            ..OracleConfig::default()
        };
        let found = match oracle_typecheck(&problem.mtt, &problem.in_type, &problem.out_type, &cfg) {
            OracleVerdict::Counterexample(t) => Some(t),
            OracleVerdict::NoCounterexampleUpTo(_) => None,
        };
        let consistent = match (&found, &witness) {
            (Some(_), None) => false,
            (None, Some(w)) => w.tree.size() > depth,
            _ => true,
        };
        OracleReport {
            depth,
            counterexample: found.map(|t| t.to_string()),
            consistent,
        }
    });
    if oracle.is_some() {
        clock.lap("oracle");
    }
    Ok(RunReport {
        verdict,
        witness,
        ata_states_materialized: outcome.states,
        output_dbta_states: out.state_count(),
        timings: clock.phases,
        options: OptionsEcho {
            algorithm: options.algorithm,
            cartesian: options.infer.cartesian,
            partition: options.infer.partition,
            complement_output: options.infer.complement,
            complement_active: outcome.complement_active,
            preprocess: options.preprocess,
            max_subsets: options.max_subsets,
        },
        emptiness: outcome.emptiness,
        oracle,
    })
}

fn decode_document(t: &Tree) -> Option<String> {
    let forest = decode_forest(t).ok()?;
    if forest.is_empty() {
        return None;
    }
    Some(forest.iter().map(ToString::to_string).collect())
}

fn run_ours(problem: &Problem, out: &Dbta, options: &Options, clock: &mut Clock) -> Result<Outcome> {
    let inf = infer_optimized(&problem.mtt, out, options.infer)?;
    let complement_active = inf.complement_active();
    let mut inter = Intersection::new(inf, bta_to_ata(&problem.in_type))?;
    clock.lap("infer");
    let (verdict, states, stats) = if options.preprocess {
        let mat = materialize(&mut inter);
        clock.lap("materialize");
        let ata = preprocess(&mat.ata);
        clock.lap("preprocess");
        let states = ata.state_count();
        let (v, s) = decide(ata);
        (v, states, s)
    } else {
        let mut checker = EmptinessChecker::new(&mut inter);
        let roots = initial_roots(checker.automaton());
        let v = checker.check_all(&roots);
        let stats = checker.stats().clone();
        drop(checker);
        (v, inter.materialized_states(), stats)
    };
    clock.lap("emptiness");
    Ok(Outcome {
        witness: verdict.witness().cloned(),
        states,
        complement_active,
        emptiness: Some(stats),
    })
}

fn initial_roots<A: Alternating>(a: &mut A) -> Vec<StateSetPair> {
    a.initial_states()
        .into_iter()
        .map(|x| StateSetPair::positive(StateSet::singleton(x)))
        .collect()
}

fn decide<A: Alternating>(mut a: A) -> (Verdict, EmptinessStats) {
    let roots = initial_roots(&mut a);
    let mut checker = EmptinessChecker::new(a);
    let v = checker.check_all(&roots);
    (v, checker.stats().clone())
}

fn run_classical(problem: &Problem, out: &Dbta, options: &Options, clock: &mut Clock) -> Result<Outcome> {
    let classical = classical_typecheck_capped(&problem.mtt, &out.complement(), options.max_subsets)?;
    clock.lap("infer");
    let product = classical.dbta.as_bta().product(&problem.in_type)?;
    let witness = product.witness();
    let states = classical.dbta.state_count();
    drop((product, classical));
    clock.lap("emptiness");
    Ok(Outcome {
        witness,
        states,
        complement_active: false,
        emptiness: None,
    })
}

fn run_mps(problem: &Problem, out: &Dbta, options: &Options, clock: &mut Clock) -> Result<Outcome> {
    let guarded = problem.mtt.encode_input_type(&problem.in_type)?;
    let spec = mps_specialize(&guarded, &out.complement())?;
    clock.lap("specialize");
    let witness = mps_domain_witness(&spec, options.max_subsets)?;
    let states = spec.mtt.proc_count();
    drop((spec, guarded));
    clock.lap("emptiness");
    Ok(Outcome {
        witness,
        states,
        complement_active: false,
        emptiness: None,
    })
}
