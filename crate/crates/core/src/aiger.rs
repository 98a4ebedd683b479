//! ASCII AIGER circuits with the synthesis extension.
//!
//! Circuits are and-inverter graphs in the `aag` text format: a header
//! `aag M I L O A`, one line per input, latch, output, and AND gate, an
//! optional symbol table, and an optional comment section. Inputs whose
//! symbol name starts with `controllable_` belong to the controller; all
//! other inputs belong to the environment.
//!
//! Parsing and serialization round-trip: `parse(serialize(c))` is
//! structurally equal to `c`, and `serialize(parse(s))` is a fixpoint of
//! serialization. Serialization is canonical (latches with reset 0 omit the
//! reset field), so golden files stay byte-stable.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Prefix that marks an input as controller-owned.
pub const CONTROLLABLE_PREFIX: &str = "controllable_";

/// An AIGER literal: variable index shifted left once, low bit = negation.
///
/// `Literal(0)` is constant FALSE and `Literal(1)` is constant TRUE.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(pub u32);

impl Literal {
    pub const FALSE: Literal = Literal(0);
    pub const TRUE: Literal = Literal(1);

    pub fn from_var(var: u32, negated: bool) -> Literal {
        Literal(var << 1 | negated as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Literal {
        Literal(self.0 ^ 1)
    }

    pub fn is_constant(self) -> bool {
        self.var() == 0
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Literal({})", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reset value of a latch. Only `Zero` is admissible for game solving;
/// the other two are recognized so diagnostics can name them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatchReset {
    Zero,
    One,
    SelfRef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Latch {
    /// Current-state literal; always even and nonzero.
    pub current: Literal,
    /// Next-state function input.
    pub next: Literal,
    pub reset: LatchReset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AndGate {
    /// Defined literal; always even and nonzero.
    pub lhs: Literal,
    pub rhs0: Literal,
    pub rhs1: Literal,
}

/// Names attached to input/latch/output positions. Indices are positions
/// within the respective section, not variable numbers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    pub inputs: HashMap<usize, String>,
    pub latches: HashMap<usize, String>,
    pub outputs: HashMap<usize, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AigCircuit {
    pub max_var: u32,
    pub inputs: Vec<Literal>,
    pub latches: Vec<Latch>,
    pub outputs: Vec<Literal>,
    pub ands: Vec<AndGate>,
    pub symbols: SymbolTable,
    /// Comment lines, without the leading `c` marker line.
    pub comments: Vec<String>,
}

impl AigCircuit {
    pub fn input_name(&self, position: usize) -> Option<&str> {
        self.symbols.inputs.get(&position).map(String::as_str)
    }

    pub fn latch_name(&self, position: usize) -> Option<&str> {
        self.symbols.latches.get(&position).map(String::as_str)
    }

    pub fn output_name(&self, position: usize) -> Option<&str> {
        self.symbols.outputs.get(&position).map(String::as_str)
    }

    /// Display name for an input: its symbol if present, else `i<pos>`.
    pub fn input_display_name(&self, position: usize) -> String {
        match self.input_name(position) {
            Some(n) => n.to_string(),
            None => format!("i{position}"),
        }
    }
}

/// Positions of uncontrollable and controllable inputs, each in original
/// relative order. The two lists partition `0..inputs.len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InputPartition {
    pub uncontrollable: Vec<usize>,
    pub controllable: Vec<usize>,
}

/// Splits input positions by the `controllable_` name prefix. Unnamed
/// inputs are uncontrollable. The prefix match is case-sensitive.
pub fn partition_inputs(circuit: &AigCircuit) -> InputPartition {
    let mut partition = InputPartition::default();
    for position in 0..circuit.inputs.len() {
        let controllable = circuit
            .input_name(position)
            .is_some_and(|name| name.starts_with(CONTROLLABLE_PREFIX));
        if controllable {
            partition.controllable.push(position);
        } else {
            partition.uncontrollable.push(position);
        }
    }
    partition
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed header: expected `aag M I L O A`")]
    MalformedHeader,
    #[error("expected {expected} more {section} line(s)")]
    MissingLine { section: &'static str, expected: usize },
    #[error("expected a number, found {found:?}")]
    ExpectedNumber { found: String },
    #[error("expected {expected} field(s) on {section} line, found {found}")]
    FieldCount { section: &'static str, expected: usize, found: usize },
    #[error("literal {literal} exceeds maximum {max} allowed by the header")]
    LiteralOutOfRange { literal: u32, max: u32 },
    #[error("{section} literal {literal} must be even and nonzero")]
    InvalidDefinition { section: &'static str, literal: u32 },
    #[error("variable {var} is defined more than once")]
    DuplicateDefinition { var: u32 },
    #[error("latch reset {reset} is not 0, 1, or the latch literal itself")]
    InvalidReset { reset: u32 },
    #[error("AND gates form a combinational cycle through variable {var}")]
    CombinationalCycle { var: u32 },
    #[error("AND gate references undefined variable {var}")]
    UndefinedVariable { var: u32 },
    #[error("malformed symbol entry")]
    MalformedSymbol,
    #[error("symbol index {index} out of range for section `{section}`")]
    SymbolIndexOutOfRange { section: char, index: usize },
    #[error("duplicate symbol for {section}{index}")]
    DuplicateSymbol { section: char, index: usize },
    #[error("unexpected trailing line after circuit body")]
    UnexpectedLine,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// One finding of [`validate_spec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecViolation {
    /// Game solving needs exactly one output (the error signal).
    OutputCount(usize),
    /// Latch at this position resets to 1 or to itself.
    NonZeroReset { position: usize, reset: LatchReset },
    /// A literal references a variable above `max_var`.
    LiteralOutOfRange { literal: Literal },
    /// A variable is defined by more than one input/latch/AND.
    DuplicateDefinition { var: u32 },
    /// An AND gate depends on a variable with no definition.
    UndefinedVariable { var: u32 },
    /// AND gates form a combinational cycle.
    CombinationalCycle { var: u32 },
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecViolation::OutputCount(n) => {
                write!(f, "expected exactly one output, found {n}")
            }
            SpecViolation::NonZeroReset { position, reset } => {
                let what = match reset {
                    LatchReset::One => "1",
                    LatchReset::SelfRef => "a nondeterministic self reset",
                    LatchReset::Zero => "0",
                };
                write!(f, "latch {position} resets to {what}; only reset 0 is supported")
            }
            SpecViolation::LiteralOutOfRange { literal } => {
                write!(f, "literal {literal} exceeds the declared maximum variable")
            }
            SpecViolation::DuplicateDefinition { var } => {
                write!(f, "variable {var} is defined more than once")
            }
            SpecViolation::UndefinedVariable { var } => {
                write!(f, "variable {var} is used but never defined")
            }
            SpecViolation::CombinationalCycle { var } => {
                write!(f, "AND gates form a combinational cycle through variable {var}")
            }
        }
    }
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    /// 1-based number of the line most recently returned.
    number: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader { lines: text.lines(), number: 0 }
    }

    fn next(&mut self) -> Option<&'a str> {
        let line = self.lines.next()?;
        self.number += 1;
        Some(line)
    }
}

fn parse_number(token: &str, line: usize) -> Result<u32, ParseError> {
    token.parse().map_err(|_| ParseError {
        line,
        kind: ParseErrorKind::ExpectedNumber { found: token.to_string() },
    })
}

fn parse_fields(
    line: &str,
    number: usize,
    section: &'static str,
    min: usize,
    max: usize,
) -> Result<Vec<u32>, ParseError> {
    let tokens: Vec<&str> = line.split(' ').filter(|t| !t.is_empty()).collect();
    if tokens.len() < min || tokens.len() > max {
        return Err(ParseError {
            line: number,
            kind: ParseErrorKind::FieldCount { section, expected: min, found: tokens.len() },
        });
    }
    tokens.iter().map(|t| parse_number(t, number)).collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Def {
    Input,
    Latch,
    And(usize),
}

/// Parses an ASCII AIGER circuit. Errors carry the 1-based line number.
///
/// Beyond the grammar this enforces the structural invariants: definition
/// literals are even, nonzero, and unique; every literal fits under the
/// header maximum; AND gates are acyclic; symbol entries are in range and
/// unique. Latch resets of 1 or self are accepted here and only rejected
/// by [`validate_spec`].
pub fn parse_ascii(text: &str) -> Result<AigCircuit, ParseError> {
    let mut reader = LineReader::new(text);

    let header_line = reader.next().ok_or(ParseError {
        line: 1,
        kind: ParseErrorKind::MalformedHeader,
    })?;
    let mut header_tokens = header_line.split(' ').filter(|t| !t.is_empty());
    if header_tokens.next() != Some("aag") {
        return Err(ParseError { line: 1, kind: ParseErrorKind::MalformedHeader });
    }
    let counts: Vec<&str> = header_tokens.collect();
    if counts.len() != 5 {
        return Err(ParseError { line: 1, kind: ParseErrorKind::MalformedHeader });
    }
    let max_var = parse_number(counts[0], 1)?;
    let num_inputs = parse_number(counts[1], 1)? as usize;
    let num_latches = parse_number(counts[2], 1)? as usize;
    let num_outputs = parse_number(counts[3], 1)? as usize;
    let num_ands = parse_number(counts[4], 1)? as usize;
    let max_literal = max_var
        .checked_mul(2)
        .and_then(|v| v.checked_add(1))
        .ok_or(ParseError { line: 1, kind: ParseErrorKind::MalformedHeader })?;

    let mut defs: HashMap<u32, Def> = HashMap::new();
    let mut define = |var: u32, def: Def, line: usize| -> Result<(), ParseError> {
        if defs.insert(var, def).is_some() {
            return Err(ParseError { line, kind: ParseErrorKind::DuplicateDefinition { var } });
        }
        Ok(())
    };
    let check_range = |literal: u32, line: usize| -> Result<Literal, ParseError> {
        if literal > max_literal {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::LiteralOutOfRange { literal, max: max_literal },
            });
        }
        Ok(Literal(literal))
    };

    let mut circuit = AigCircuit { max_var, ..AigCircuit::default() };

    for remaining in (1..=num_inputs).rev() {
        let line = reader.next().ok_or(ParseError {
            line: reader.number + 1,
            kind: ParseErrorKind::MissingLine { section: "input", expected: remaining },
        })?;
        let fields = parse_fields(line, reader.number, "input", 1, 1)?;
        let literal = check_range(fields[0], reader.number)?;
        if literal.is_negated() || literal.is_constant() {
            return Err(ParseError {
                line: reader.number,
                kind: ParseErrorKind::InvalidDefinition { section: "input", literal: literal.0 },
            });
        }
        define(literal.var(), Def::Input, reader.number)?;
        circuit.inputs.push(literal);
    }

    for remaining in (1..=num_latches).rev() {
        let line = reader.next().ok_or(ParseError {
            line: reader.number + 1,
            kind: ParseErrorKind::MissingLine { section: "latch", expected: remaining },
        })?;
        let fields = parse_fields(line, reader.number, "latch", 2, 3)?;
        let current = check_range(fields[0], reader.number)?;
        if current.is_negated() || current.is_constant() {
            return Err(ParseError {
                line: reader.number,
                kind: ParseErrorKind::InvalidDefinition { section: "latch", literal: current.0 },
            });
        }
        let next = check_range(fields[1], reader.number)?;
        let reset = match fields.get(2) {
            None | Some(0) => LatchReset::Zero,
            Some(1) => LatchReset::One,
            Some(&r) if r == current.0 => LatchReset::SelfRef,
            Some(&r) => {
                return Err(ParseError {
                    line: reader.number,
                    kind: ParseErrorKind::InvalidReset { reset: r },
                })
            }
        };
        define(current.var(), Def::Latch, reader.number)?;
        circuit.latches.push(Latch { current, next, reset });
    }

    for remaining in (1..=num_outputs).rev() {
        let line = reader.next().ok_or(ParseError {
            line: reader.number + 1,
            kind: ParseErrorKind::MissingLine { section: "output", expected: remaining },
        })?;
        let fields = parse_fields(line, reader.number, "output", 1, 1)?;
        circuit.outputs.push(check_range(fields[0], reader.number)?);
    }

    for remaining in (1..=num_ands).rev() {
        let line = reader.next().ok_or(ParseError {
            line: reader.number + 1,
            kind: ParseErrorKind::MissingLine { section: "AND", expected: remaining },
        })?;
        let fields = parse_fields(line, reader.number, "AND", 3, 3)?;
        let lhs = check_range(fields[0], reader.number)?;
        if lhs.is_negated() || lhs.is_constant() {
            return Err(ParseError {
                line: reader.number,
                kind: ParseErrorKind::InvalidDefinition { section: "AND", literal: lhs.0 },
            });
        }
        let rhs0 = check_range(fields[1], reader.number)?;
        let rhs1 = check_range(fields[2], reader.number)?;
        define(lhs.var(), Def::And(circuit.ands.len()), reader.number)?;
        circuit.ands.push(AndGate { lhs, rhs0, rhs1 });
    }

    if let Some(violation) = check_and_structure(&circuit, &defs) {
        let (var, undefined) = violation;
        let kind = if undefined {
            ParseErrorKind::UndefinedVariable { var }
        } else {
            ParseErrorKind::CombinationalCycle { var }
        };
        return Err(ParseError { line: reader.number, kind });
    }

    // Symbol table, then optional comment section.
    while let Some(line) = reader.next() {
        if line == "c" {
            for comment in reader.lines.by_ref() {
                circuit.comments.push(comment.to_string());
            }
            break;
        }
        let (kind, rest) = match line.chars().next() {
            Some(k @ ('i' | 'l' | 'o')) => (k, &line[1..]),
            _ => return Err(ParseError { line: reader.number, kind: ParseErrorKind::UnexpectedLine }),
        };
        let (index_token, name) = rest.split_once(' ').ok_or(ParseError {
            line: reader.number,
            kind: ParseErrorKind::MalformedSymbol,
        })?;
        let index = index_token.parse::<usize>().map_err(|_| ParseError {
            line: reader.number,
            kind: ParseErrorKind::MalformedSymbol,
        })?;
        let (table, limit) = match kind {
            'i' => (&mut circuit.symbols.inputs, num_inputs),
            'l' => (&mut circuit.symbols.latches, num_latches),
            _ => (&mut circuit.symbols.outputs, num_outputs),
        };
        if index >= limit {
            return Err(ParseError {
                line: reader.number,
                kind: ParseErrorKind::SymbolIndexOutOfRange { section: kind, index },
            });
        }
        if table.insert(index, name.to_string()).is_some() {
            return Err(ParseError {
                line: reader.number,
                kind: ParseErrorKind::DuplicateSymbol { section: kind, index },
            });
        }
    }

    Ok(circuit)
}

/// Checks that every AND operand is defined and that gates are acyclic.
/// Returns the offending variable and whether it was undefined (vs cyclic).
fn check_and_structure(circuit: &AigCircuit, defs: &HashMap<u32, Def>) -> Option<(u32, bool)> {
    // Iterative DFS over gate dependencies; file order is not trusted.
    const UNSEEN: u8 = 0;
    const OPEN: u8 = 1;
    const DONE: u8 = 2;
    let mut state: HashMap<u32, u8> = HashMap::new();
    for gate in &circuit.ands {
        let root = gate.lhs.var();
        if state.get(&root).copied().unwrap_or(UNSEEN) == DONE {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state.insert(root, OPEN);
        while let Some(&(var, phase)) = stack.last() {
            let Def::And(gate_index) = defs[&var] else { unreachable!() };
            let gate = &circuit.ands[gate_index];
            let operands = [gate.rhs0, gate.rhs1];
            if phase == operands.len() {
                state.insert(var, DONE);
                stack.pop();
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let operand = operands[phase];
            if operand.is_constant() {
                continue;
            }
            let dep = operand.var();
            match defs.get(&dep) {
                None => return Some((dep, true)),
                Some(Def::Input) | Some(Def::Latch) => {}
                Some(Def::And(_)) => match state.get(&dep).copied().unwrap_or(UNSEEN) {
                    DONE => {}
                    OPEN => return Some((dep, false)),
                    _ => {
                        state.insert(dep, OPEN);
                        stack.push((dep, 0));
                    }
                },
            }
        }
    }
    None
}

/// Serializes to canonical ASCII AIGER. Latches with reset 0 omit the
/// reset field; symbol entries are emitted in index order; the comment
/// section appears only when comments exist.
pub fn serialize_ascii(circuit: &AigCircuit) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "aag {} {} {} {} {}\n",
        circuit.max_var,
        circuit.inputs.len(),
        circuit.latches.len(),
        circuit.outputs.len(),
        circuit.ands.len()
    ));
    for input in &circuit.inputs {
        out.push_str(&format!("{}\n", input.0));
    }
    for latch in &circuit.latches {
        match latch.reset {
            LatchReset::Zero => out.push_str(&format!("{} {}\n", latch.current.0, latch.next.0)),
            LatchReset::One => out.push_str(&format!("{} {} 1\n", latch.current.0, latch.next.0)),
            LatchReset::SelfRef => out.push_str(&format!(
                "{} {} {}\n",
                latch.current.0, latch.next.0, latch.current.0
            )),
        }
    }
    for output in &circuit.outputs {
        out.push_str(&format!("{}\n", output.0));
    }
    for gate in &circuit.ands {
        out.push_str(&format!("{} {} {}\n", gate.lhs.0, gate.rhs0.0, gate.rhs1.0));
    }
    for (section, table, count) in [
        ('i', &circuit.symbols.inputs, circuit.inputs.len()),
        ('l', &circuit.symbols.latches, circuit.latches.len()),
        ('o', &circuit.symbols.outputs, circuit.outputs.len()),
    ] {
        for index in 0..count {
            if let Some(name) = table.get(&index) {
                out.push_str(&format!("{section}{index} {name}\n"));
            }
        }
    }
    if !circuit.comments.is_empty() {
        out.push_str("c\n");
        for comment in &circuit.comments {
            out.push_str(comment);
            out.push('\n');
        }
    }
    out
}

/// Checks whether a circuit is admissible as a safety-game specification:
/// exactly one output, all latch resets 0, and structural sanity for
/// circuits built by hand rather than parsed. Returns every violation
/// found, empty when admissible.
pub fn validate_spec(circuit: &AigCircuit) -> Vec<SpecViolation> {
    let mut violations = Vec::new();
    if circuit.outputs.len() != 1 {
        violations.push(SpecViolation::OutputCount(circuit.outputs.len()));
    }
    for (position, latch) in circuit.latches.iter().enumerate() {
        if latch.reset != LatchReset::Zero {
            violations.push(SpecViolation::NonZeroReset { position, reset: latch.reset });
        }
    }

    let mut defs: HashMap<u32, Def> = HashMap::new();
    let duplicate = |defs: &mut HashMap<u32, Def>, var: u32, def: Def| -> bool {
        defs.insert(var, def).is_some()
    };
    for input in &circuit.inputs {
        if duplicate(&mut defs, input.var(), Def::Input) {
            violations.push(SpecViolation::DuplicateDefinition { var: input.var() });
        }
    }
    for latch in &circuit.latches {
        if duplicate(&mut defs, latch.current.var(), Def::Latch) {
            violations.push(SpecViolation::DuplicateDefinition { var: latch.current.var() });
        }
    }
    for (index, gate) in circuit.ands.iter().enumerate() {
        if duplicate(&mut defs, gate.lhs.var(), Def::And(index)) {
            violations.push(SpecViolation::DuplicateDefinition { var: gate.lhs.var() });
        }
    }

    let max_literal = circuit.max_var * 2 + 1;
    let mut all_literals: Vec<Literal> = circuit.inputs.clone();
    all_literals.extend(circuit.latches.iter().flat_map(|l| [l.current, l.next]));
    all_literals.extend(circuit.outputs.iter().copied());
    all_literals.extend(circuit.ands.iter().flat_map(|g| [g.lhs, g.rhs0, g.rhs1]));
    for literal in all_literals {
        if literal.0 > max_literal {
            violations.push(SpecViolation::LiteralOutOfRange { literal });
        }
    }

    if violations.iter().all(|v| !matches!(v, SpecViolation::DuplicateDefinition { .. }))
        && violations.iter().all(|v| !matches!(v, SpecViolation::LiteralOutOfRange { .. }))
    {
        if let Some((var, undefined)) = check_and_structure(circuit, &defs) {
            violations.push(if undefined {
                SpecViolation::UndefinedVariable { var }
            } else {
                SpecViolation::CombinationalCycle { var }
            });
        }
    }

    violations
}

/// Outputs and next state produced by one simulation step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimStep {
    pub outputs: Vec<bool>,
    pub next_state: Vec<bool>,
}

/// Gate-level simulator. Precomputes a topological order once so repeated
/// stepping over the same circuit is cheap.
pub struct Simulator<'a> {
    circuit: &'a AigCircuit,
    /// AND gate indices in dependency order.
    gate_order: Vec<usize>,
    /// Scratch: value per variable index, reused across steps.
    values: Vec<bool>,
}

impl<'a> Simulator<'a> {
    /// Panics if the circuit is cyclic or references undefined variables;
    /// run [`validate_spec`] first for untrusted circuits.
    pub fn new(circuit: &'a AigCircuit) -> Simulator<'a> {
        let mut defs: HashMap<u32, Def> = HashMap::new();
        for input in &circuit.inputs {
            defs.insert(input.var(), Def::Input);
        }
        for latch in &circuit.latches {
            defs.insert(latch.current.var(), Def::Latch);
        }
        for (index, gate) in circuit.ands.iter().enumerate() {
            defs.insert(gate.lhs.var(), Def::And(index));
        }
        assert!(
            check_and_structure(circuit, &defs).is_none(),
            "cannot simulate a cyclic or incomplete circuit"
        );

        // Kahn-style ordering over gate dependencies.
        let mut order = Vec::with_capacity(circuit.ands.len());
        let mut emitted = vec![false; circuit.ands.len()];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..circuit.ands.len() {
            if emitted[start] {
                continue;
            }
            stack.push((start, 0));
            while let Some(&(gate_index, phase)) = stack.last() {
                let gate = &circuit.ands[gate_index];
                let operands = [gate.rhs0, gate.rhs1];
                if phase == operands.len() {
                    stack.pop();
                    if !emitted[gate_index] {
                        emitted[gate_index] = true;
                        order.push(gate_index);
                    }
                    continue;
                }
                stack.last_mut().unwrap().1 += 1;
                let operand = operands[phase];
                if operand.is_constant() {
                    continue;
                }
                if let Some(Def::And(dep)) = defs.get(&operand.var()) {
                    if !emitted[*dep] {
                        stack.push((*dep, 0));
                    }
                }
            }
        }

        Simulator {
            circuit,
            gate_order: order,
            values: vec![false; circuit.max_var as usize + 1],
        }
    }

    /// Evaluates one step from `state` (one bit per latch) under `inputs`
    /// (one bit per input, in input order).
    pub fn step(&mut self, state: &[bool], inputs: &[bool]) -> SimStep {
        assert_eq!(state.len(), self.circuit.latches.len(), "state width mismatch");
        assert_eq!(inputs.len(), self.circuit.inputs.len(), "input width mismatch");
        self.values[0] = false;
        for (literal, value) in self.circuit.inputs.iter().zip(inputs) {
            self.values[literal.var() as usize] = *value;
        }
        for (latch, value) in self.circuit.latches.iter().zip(state) {
            self.values[latch.current.var() as usize] = *value;
        }
        for &gate_index in &self.gate_order {
            let gate = &self.circuit.ands[gate_index];
            let value = self.literal_value(gate.rhs0) && self.literal_value(gate.rhs1);
            self.values[gate.lhs.var() as usize] = value;
        }
        SimStep {
            outputs: self.circuit.outputs.iter().map(|&o| self.literal_value(o)).collect(),
            next_state: self.circuit.latches.iter().map(|l| self.literal_value(l.next)).collect(),
        }
    }

    fn literal_value(&self, literal: Literal) -> bool {
        self.values[literal.var() as usize] ^ literal.is_negated()
    }
}

/// Incremental circuit constructor with constant folding and structural
/// hashing: `and` never emits a gate whose value is constant, already
/// defined, or a duplicate of an existing gate.
///
/// Variables are numbered in creation order, so callers that want the
/// conventional layout (inputs first, then latches, then gates) should
/// declare inputs and latches before building logic.
pub struct CircuitBuilder {
    next_var: u32,
    inputs: Vec<(Literal, Option<String>)>,
    latches: Vec<LatchSlot>,
    outputs: Vec<(Literal, Option<String>)>,
    ands: Vec<AndGate>,
    strash: HashMap<(Literal, Literal), Literal>,
    latch_position: HashMap<u32, usize>,
    comments: Vec<String>,
}

struct LatchSlot {
    current: Literal,
    next: Option<Literal>,
    name: Option<String>,
}

impl Default for CircuitBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl CircuitBuilder {
    pub fn new() -> CircuitBuilder {
        CircuitBuilder {
            next_var: 1,
            inputs: Vec::new(),
            latches: Vec::new(),
            outputs: Vec::new(),
            ands: Vec::new(),
            strash: HashMap::new(),
            latch_position: HashMap::new(),
            comments: Vec::new(),
        }
    }

    fn fresh_var(&mut self) -> u32 {
        let var = self.next_var;
        self.next_var += 1;
        var
    }

    pub fn add_input(&mut self, name: Option<&str>) -> Literal {
        let literal = Literal::from_var(self.fresh_var(), false);
        self.inputs.push((literal, name.map(str::to_string)));
        literal
    }

    /// Declares a latch with reset 0. Its next-state function must be set
    /// with [`CircuitBuilder::set_latch_next`] before [`CircuitBuilder::finish`].
    pub fn add_latch(&mut self, name: Option<&str>) -> Literal {
        let literal = Literal::from_var(self.fresh_var(), false);
        self.latch_position.insert(literal.var(), self.latches.len());
        self.latches.push(LatchSlot { current: literal, next: None, name: name.map(str::to_string) });
        literal
    }

    pub fn set_latch_next(&mut self, latch: Literal, next: Literal) {
        let position = self.latch_position[&latch.var()];
        self.latches[position].next = Some(next);
    }

    pub fn add_output(&mut self, literal: Literal, name: Option<&str>) {
        self.outputs.push((literal, name.map(str::to_string)));
    }

    pub fn add_comment(&mut self, line: &str) {
        self.comments.push(line.to_string());
    }

    pub fn and(&mut self, a: Literal, b: Literal) -> Literal {
        if a == Literal::FALSE || b == Literal::FALSE || a == b.negate() {
            return Literal::FALSE;
        }
        if a == Literal::TRUE {
            return b;
        }
        if b == Literal::TRUE || a == b {
            return a;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&existing) = self.strash.get(&key) {
            return existing;
        }
        let lhs = Literal::from_var(self.fresh_var(), false);
        self.ands.push(AndGate { lhs, rhs0: key.0, rhs1: key.1 });
        self.strash.insert(key, lhs);
        lhs
    }

    pub fn or(&mut self, a: Literal, b: Literal) -> Literal {
        self.and(a.negate(), b.negate()).negate()
    }

    pub fn xor(&mut self, a: Literal, b: Literal) -> Literal {
        let both = self.and(a, b);
        let neither = self.and(a.negate(), b.negate());
        self.or(both, neither).negate()
    }

    /// If-then-else: `condition ? then_branch : else_branch`.
    pub fn mux(&mut self, condition: Literal, then_branch: Literal, else_branch: Literal) -> Literal {
        let on_true = self.and(condition, then_branch);
        let on_false = self.and(condition.negate(), else_branch);
        self.or(on_true, on_false)
    }

    pub fn and_count(&self) -> usize {
        self.ands.len()
    }

    /// Panics if any latch still lacks a next-state function.
    pub fn finish(self) -> AigCircuit {
        let mut symbols = SymbolTable::default();
        let mut inputs = Vec::with_capacity(self.inputs.len());
        for (position, (literal, name)) in self.inputs.into_iter().enumerate() {
            if let Some(name) = name {
                symbols.inputs.insert(position, name);
            }
            inputs.push(literal);
        }
        let mut latches = Vec::with_capacity(self.latches.len());
        for (position, slot) in self.latches.into_iter().enumerate() {
            let next = slot
                .next
                .unwrap_or_else(|| panic!("latch {position} has no next-state function"));
            if let Some(name) = slot.name {
                symbols.latches.insert(position, name);
            }
            latches.push(Latch { current: slot.current, next, reset: LatchReset::Zero });
        }
        let mut outputs = Vec::with_capacity(self.outputs.len());
        for (position, (literal, name)) in self.outputs.into_iter().enumerate() {
            if let Some(name) = name {
                symbols.outputs.insert(position, name);
            }
            outputs.push(literal);
        }
        AigCircuit {
            max_var: self.next_var - 1,
            inputs,
            latches,
            outputs,
            ands: self.ands,
            symbols,
            comments: self.comments,
        }
    }
}
