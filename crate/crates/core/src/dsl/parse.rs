//! Tokenizer and recursive-descent parser for the problem format.

use crate::criteria::{
    Assignment, Attitude, BasicAssignment, Criterion, ExtendedBinaryUtility,
};
use crate::lottery::OutcomeSpace;
use crate::scale::{is_label_char, Level, Scale};

use super::{
    BranchTarget, LotteryDef, ParseError, ParseErrorKind, Problem, Query, ReductionMode,
};

const RESERVED: &[&str] = &[
    "qdm",
    "scale",
    "consequences",
    "best",
    "worst",
    "assign",
    "lottery",
    "query",
    "compare",
    "eval",
    "reduce",
    "criterion",
    "attitude",
    "assignment",
    "under",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Atom,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Colon,
    Slash,
    Equals,
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
}

fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tok_line, tok_column) = (line, column);
        let mut push = |tok: Tok, text: String| {
            tokens.push(Token {
                tok,
                text,
                line: tok_line,
                column: tok_column,
            });
        };
        match c {
            '\n' => {
                chars.next();
                push(Tok::Newline, "\\n".to_owned());
                line += 1;
                column = 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '{' | '}' | '[' | ']' | '<' | '>' | ',' | ':' | '/' | '=' => {
                chars.next();
                column += 1;
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '/' => Tok::Slash,
                    _ => Tok::Equals,
                };
                push(tok, c.to_string());
            }
            c if is_label_char(c) => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_label_char(c) {
                        break;
                    }
                    text.push(c);
                    chars.next();
                    column += 1;
                }
                push(Tok::Atom, text);
            }
            other => {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::Lexical,
                    expected: "a token".to_owned(),
                    found: other.to_string(),
                });
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        text: "end of input".to_owned(),
        line,
        column,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind, expected: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            kind,
            expected: expected.into(),
            found: t.text.clone(),
        }
    }

    fn error_at(
        &self,
        token: &Token,
        kind: ParseErrorKind,
        expected: impl Into<String>,
    ) -> ParseError {
        ParseError {
            line: token.line,
            column: token.column,
            kind,
            expected: expected.into(),
            found: token.text.clone(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.error(ParseErrorKind::Expected, expected))
        }
    }

    fn expect_atom(&mut self, expected: &str) -> Result<Token, ParseError> {
        self.expect(Tok::Atom, expected)
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), ParseError> {
        let t = self.peek();
        if t.tok == Tok::Atom && t.text == keyword {
            self.bump();
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Expected, format!("`{keyword}`")))
        }
    }

    /// A name token: an atom that is not a keyword.
    fn expect_name(&mut self, expected: &str) -> Result<Token, ParseError> {
        let t = self.expect_atom(expected)?;
        if RESERVED.contains(&t.text.as_str()) {
            Err(self.error_at(&t, ParseErrorKind::ReservedWord, expected))
        } else {
            Ok(t)
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    /// End of a declaration: a newline or the end of input.
    fn end_of_line(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.error(ParseErrorKind::Expected, "end of line")),
        }
    }

    fn at_keyword(&self, keyword: &str) -> bool {
        let t = self.peek();
        t.tok == Tok::Atom && t.text == keyword
    }
}

struct Declared {
    scale: Option<Scale>,
    consequences: Option<OutcomeSpace>,
    assignments: Vec<(String, BasicAssignment)>,
    lotteries: Vec<(String, LotteryDef)>,
    queries: Vec<Query>,
}

impl Declared {
    fn scale(&self, p: &Parser) -> Result<Scale, ParseError> {
        self.scale
            .clone()
            .ok_or_else(|| p.error(ParseErrorKind::Expected, "a `scale` declaration first"))
    }

    fn space(&self, p: &Parser) -> Result<OutcomeSpace, ParseError> {
        self.consequences
            .clone()
            .ok_or_else(|| p.error(ParseErrorKind::Expected, "a `consequences` declaration first"))
    }

    fn level(&self, p: &Parser, token: &Token) -> Result<Level, ParseError> {
        let scale = self.scale(p)?;
        scale.level_by_label(&token.text).ok_or_else(|| {
            p.error_at(
                token,
                ParseErrorKind::UnknownLevel,
                "a level of the declared scale",
            )
        })
    }

    /// Resolve a branch target: consequence first, then earlier lottery.
    fn target(&self, p: &Parser, token: &Token) -> Result<BranchTarget, ParseError> {
        let space = self.space(p)?;
        if let Some(x) = space.by_name(&token.text) {
            return Ok(BranchTarget::Consequence(x.index()));
        }
        if self.lotteries.iter().any(|(n, _)| n == &token.text) {
            return Ok(BranchTarget::Lottery(token.text.clone()));
        }
        Err(p.error_at(
            token,
            ParseErrorKind::UnknownReference,
            "a consequence or previously defined lottery",
        ))
    }

    fn lottery_name(&self, p: &Parser, token: &Token) -> Result<String, ParseError> {
        let space = self.space(p)?;
        if space.by_name(&token.text).is_some()
            || self.lotteries.iter().any(|(n, _)| n == &token.text)
        {
            return Ok(token.text.clone());
        }
        Err(p.error_at(
            token,
            ParseErrorKind::UnknownReference,
            "a defined lottery or consequence",
        ))
    }
}

/// Parse a problem file, returning the first error encountered.
pub fn parse(input: &str) -> Result<Problem, ParseError> {
    let tokens = lex(input)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Declared {
        scale: None,
        consequences: None,
        assignments: Vec::new(),
        lotteries: Vec::new(),
        queries: Vec::new(),
    };

    p.skip_newlines();
    p.expect_keyword("qdm")
        .map_err(|e| ParseError {
            expected: "the header `qdm 1`".to_owned(),
            ..e
        })?;
    let version = p.expect_atom("the format version `1`")?;
    if version.text != "1" {
        return Err(p.error_at(
            &version,
            ParseErrorKind::InvalidDeclaration,
            "the format version `1`",
        ));
    }
    p.end_of_line()?;

    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        if p.at_keyword("scale") {
            parse_scale(&mut p, &mut decls)?;
        } else if p.at_keyword("consequences") {
            parse_consequences(&mut p, &mut decls)?;
        } else if p.at_keyword("assign") {
            parse_assign(&mut p, &mut decls)?;
        } else if p.at_keyword("lottery") {
            parse_lottery(&mut p, &mut decls)?;
        } else if p.at_keyword("query") {
            parse_query(&mut p, &mut decls)?;
        } else {
            return Err(p.error(
                ParseErrorKind::Expected,
                "`scale`, `consequences`, `assign`, `lottery` or `query`",
            ));
        }
    }

    let scale = decls.scale(&p)?;
    let space = decls.space(&p)?;
    Ok(Problem {
        scale,
        space,
        assignments: decls.assignments,
        lotteries: decls.lotteries,
        queries: decls.queries,
    })
}

fn parse_scale(p: &mut Parser, decls: &mut Declared) -> Result<(), ParseError> {
    let keyword = p.bump();
    if decls.scale.is_some() {
        return Err(p.error_at(
            &keyword,
            ParseErrorKind::DuplicateName,
            "a single `scale` declaration",
        ));
    }
    let mut labels: Vec<Token> = Vec::new();
    while p.peek().tok == Tok::Atom {
        let label = p.expect_name("a level label")?;
        if labels.iter().any(|t| t.text == label.text) {
            return Err(p.error_at(
                &label,
                ParseErrorKind::DuplicateName,
                "a fresh level label",
            ));
        }
        labels.push(label);
    }
    if labels.len() < 2 {
        return Err(p.error(ParseErrorKind::InvalidDeclaration, "at least two level labels"));
    }
    p.end_of_line()?;
    let scale = Scale::with_labels(labels.iter().map(|t| t.text.clone())).map_err(|_| {
        p.error(ParseErrorKind::InvalidDeclaration, "valid scale labels")
    })?;
    decls.scale = Some(scale);
    Ok(())
}

fn parse_consequences(p: &mut Parser, decls: &mut Declared) -> Result<(), ParseError> {
    let keyword = p.bump();
    if decls.consequences.is_some() {
        return Err(p.error_at(
            &keyword,
            ParseErrorKind::DuplicateName,
            "a single `consequences` declaration",
        ));
    }
    let mut names: Vec<Token> = Vec::new();
    while p.peek().tok == Tok::Atom && !p.at_keyword("best") {
        let name = p.expect_name("a consequence name")?;
        if names.iter().any(|t| t.text == name.text) {
            return Err(p.error_at(
                &name,
                ParseErrorKind::DuplicateName,
                "a fresh consequence name",
            ));
        }
        names.push(name);
    }
    if names.len() < 2 {
        return Err(p.error(
            ParseErrorKind::InvalidDeclaration,
            "at least two consequence names",
        ));
    }
    p.expect_keyword("best")?;
    let best = p.expect_name("the best consequence")?;
    p.expect_keyword("worst")?;
    let worst = p.expect_name("the worst consequence")?;
    p.end_of_line()?;
    if best.text != names[0].text {
        return Err(p.error_at(
            &best,
            ParseErrorKind::InvalidDeclaration,
            "the first listed consequence (names are ordered best to worst)",
        ));
    }
    if worst.text != names[names.len() - 1].text {
        return Err(p.error_at(
            &worst,
            ParseErrorKind::InvalidDeclaration,
            "the last listed consequence (names are ordered best to worst)",
        ));
    }
    let space = OutcomeSpace::new(names.iter().map(|t| t.text.clone()))
        .map_err(|_| p.error(ParseErrorKind::InvalidDeclaration, "a valid consequence list"))?;
    decls.consequences = Some(space);
    Ok(())
}

enum EntryValue {
    Pair(Level, Level),
    Single(Level),
}

fn parse_assign(p: &mut Parser, decls: &mut Declared) -> Result<(), ParseError> {
    p.bump();
    let name = p.expect_name("an assignment name")?;
    if decls.assignments.iter().any(|(n, _)| n == &name.text) {
        return Err(p.error_at(
            &name,
            ParseErrorKind::DuplicateName,
            "a fresh assignment name",
        ));
    }
    let space = decls.space(p)?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut entries: Vec<Option<EntryValue>> = (0..space.len()).map(|_| None).collect();
    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::RBrace {
            p.bump();
            break;
        }
        let consequence = p.expect_name("a consequence name or `}`")?;
        let Some(x) = space.by_name(&consequence.text) else {
            return Err(p.error_at(
                &consequence,
                ParseErrorKind::UnknownReference,
                "a consequence of the declared space",
            ));
        };
        if entries[x.index()].is_some() {
            return Err(p.error_at(
                &consequence,
                ParseErrorKind::DuplicateName,
                "each consequence at most once",
            ));
        }
        p.expect(Tok::Colon, "`:`")?;
        let value = if p.peek().tok == Tok::Lt {
            p.bump();
            p.skip_newlines();
            let lam = p.expect_atom("a level label")?;
            let lam = decls.level(p, &lam)?;
            p.expect(Tok::Comma, "`,`")?;
            p.skip_newlines();
            let mu = p.expect_atom("a level label")?;
            let mu = decls.level(p, &mu)?;
            p.expect(Tok::Gt, "`>`")?;
            EntryValue::Pair(lam, mu)
        } else {
            let token = p.expect_atom("a level label or `<`")?;
            EntryValue::Single(decls.level(p, &token)?)
        };
        entries[x.index()] = Some(value);
    }
    p.end_of_line()?;

    let missing = entries.iter().position(Option::is_none);
    if let Some(i) = missing {
        return Err(p.error(
            ParseErrorKind::InvalidDeclaration,
            format!("a value for consequence `{}` (assignments are total)", space.name(i)),
        ));
    }
    let entries: Vec<EntryValue> = entries.into_iter().map(Option::unwrap).collect();
    let all_pairs = entries.iter().all(|e| matches!(e, EntryValue::Pair(..)));
    let all_single = entries.iter().all(|e| matches!(e, EntryValue::Single(..)));
    let assignment = if all_pairs {
        let values = entries
            .iter()
            .map(|e| match e {
                EntryValue::Pair(lam, mu) => ExtendedBinaryUtility::new(*lam, *mu)
                    .expect("parsed levels share the declared scale"),
                EntryValue::Single(_) => unreachable!(),
            })
            .collect();
        BasicAssignment::Extended(
            Assignment::new(&space, values).expect("entries are total by construction"),
        )
    } else if all_single {
        let values = entries
            .iter()
            .map(|e| match e {
                EntryValue::Single(l) => *l,
                EntryValue::Pair(..) => unreachable!(),
            })
            .collect();
        BasicAssignment::Levels(
            Assignment::new(&space, values).expect("entries are total by construction"),
        )
    } else {
        return Err(p.error(
            ParseErrorKind::InvalidDeclaration,
            "a homogeneous assignment (all pairs or all single levels)",
        ));
    };
    decls.assignments.push((name.text, assignment));
    Ok(())
}

fn parse_lottery(p: &mut Parser, decls: &mut Declared) -> Result<(), ParseError> {
    p.bump();
    let name = p.expect_name("a lottery name")?;
    let space = decls.space(p)?;
    if decls.lotteries.iter().any(|(n, _)| n == &name.text)
        || space.by_name(&name.text).is_some()
    {
        return Err(p.error_at(
            &name,
            ParseErrorKind::DuplicateName,
            "a fresh lottery name (not shadowing a consequence)",
        ));
    }
    p.expect(Tok::Equals, "`=`")?;
    p.expect(Tok::LBracket, "`[`")?;
    let mut branches = Vec::new();
    loop {
        p.skip_newlines();
        let coef = p.expect_atom("a level label")?;
        let coef = decls.level(p, &coef)?;
        p.expect(Tok::Slash, "`/`")?;
        let target = p.expect_name("a consequence or lottery name")?;
        let target = decls.target(p, &target)?;
        branches.push((coef, target));
        p.skip_newlines();
        match p.peek().tok {
            Tok::Comma => {
                p.bump();
            }
            Tok::RBracket => {
                p.bump();
                break;
            }
            _ => return Err(p.error(ParseErrorKind::Expected, "`,` or `]`")),
        }
    }
    p.end_of_line()?;
    decls.lotteries.push((name.text, LotteryDef { branches }));
    Ok(())
}

fn parse_query(p: &mut Parser, decls: &mut Declared) -> Result<(), ParseError> {
    p.bump();
    if p.at_keyword("compare") {
        p.bump();
        let left = p.expect_name("a lottery name")?;
        let left = decls.lottery_name(p, &left)?;
        let right = p.expect_name("a lottery name")?;
        let right = decls.lottery_name(p, &right)?;
        let (criterion, attitude, assignment) = parse_query_options(p, decls)?;
        decls.queries.push(Query::Compare {
            left,
            right,
            criterion,
            attitude,
            assignment,
        });
    } else if p.at_keyword("eval") {
        p.bump();
        let lottery = p.expect_name("a lottery name")?;
        let lottery = decls.lottery_name(p, &lottery)?;
        let (criterion, attitude, assignment) = parse_query_options(p, decls)?;
        decls.queries.push(Query::Eval {
            lottery,
            criterion,
            attitude,
            assignment,
        });
    } else if p.at_keyword("reduce") {
        p.bump();
        let lottery = p.expect_name("a lottery name")?;
        let lottery = decls.lottery_name(p, &lottery)?;
        p.expect_keyword("under")?;
        let mode = p.expect_atom("`R` or `RR`")?;
        let mode = match mode.text.as_str() {
            "R" => ReductionMode::Classical,
            "RR" => ReductionMode::Refined,
            _ => return Err(p.error_at(&mode, ParseErrorKind::Expected, "`R` or `RR`")),
        };
        p.end_of_line()?;
        decls.queries.push(Query::Reduce { lottery, mode });
    } else {
        return Err(p.error(ParseErrorKind::Expected, "`compare`, `eval` or `reduce`"));
    }
    Ok(())
}

fn parse_query_options(
    p: &mut Parser,
    decls: &Declared,
) -> Result<(Criterion, Option<Attitude>, Option<String>), ParseError> {
    let mut criterion = None;
    let mut attitude = None;
    let mut assignment = None;
    loop {
        if p.at_keyword("criterion") {
            let keyword = p.bump();
            if criterion.is_some() {
                return Err(p.error_at(
                    &keyword,
                    ParseErrorKind::DuplicateName,
                    "a single `criterion` option",
                ));
            }
            let token = p.expect_atom("a criterion (pu|uopt|upess|lexpu|rpu)")?;
            criterion = Some(token.text.parse::<Criterion>().map_err(|_| {
                p.error_at(
                    &token,
                    ParseErrorKind::Expected,
                    "a criterion (pu|uopt|upess|lexpu|rpu)",
                )
            })?);
        } else if p.at_keyword("attitude") {
            let keyword = p.bump();
            if attitude.is_some() {
                return Err(p.error_at(
                    &keyword,
                    ParseErrorKind::DuplicateName,
                    "a single `attitude` option",
                ));
            }
            let token = p.expect_atom("an attitude (pessimistic|optimistic|neutral)")?;
            attitude = Some(token.text.parse::<Attitude>().map_err(|_| {
                p.error_at(
                    &token,
                    ParseErrorKind::Expected,
                    "an attitude (pessimistic|optimistic|neutral)",
                )
            })?);
        } else if p.at_keyword("assignment") {
            let keyword = p.bump();
            if assignment.is_some() {
                return Err(p.error_at(
                    &keyword,
                    ParseErrorKind::DuplicateName,
                    "a single `assignment` option",
                ));
            }
            let token = p.expect_name("an assignment name")?;
            if !decls.assignments.iter().any(|(n, _)| n == &token.text) {
                return Err(p.error_at(
                    &token,
                    ParseErrorKind::UnknownReference,
                    "a declared assignment",
                ));
            }
            assignment = Some(token.text);
        } else {
            break;
        }
    }
    let Some(criterion) = criterion else {
        return Err(p.error(ParseErrorKind::Expected, "`criterion`"));
    };
    if assignment.is_none() {
        match decls.assignments.len() {
            1 => {}
            0 => {
                return Err(p.error(
                    ParseErrorKind::UnknownReference,
                    "an `assignment` option (the problem declares none)",
                ));
            }
            n => {
                let _ = n;
                return Err(p.error(
                    ParseErrorKind::AmbiguousReference,
                    "an `assignment` option (several assignments are declared)",
                ));
            }
        }
    }
    p.end_of_line()?;
    Ok((criterion, attitude, assignment))
}
