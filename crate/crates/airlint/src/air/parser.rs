//! Recursive-descent parser for AIR text. Syntax errors abort at the first
//! offence; semantic errors (resolution + invariants) are collected in bulk
//! by validation after the tree is built.

use super::lexer::{lex, Tok, TokKind};
use super::{
    AirError, AppModel, Block, Component, ComponentKind, CallbackKind, Cond, Manifest, Method,
    Param, ParamType, Source, Statement, Terminator,
};
use std::collections::{BTreeMap, BTreeSet};

/// Parse and validate with the default latest-available version.
pub fn parse_app(text: &str) -> Result<AppModel, Vec<AirError>> {
    parse_app_with_lav(text, crate::config::DEFAULT_LAV)
}

/// Parse and validate against an explicit latest-available version, which
/// bounds `targetSdk` and the constants of `sdk` branch conditions.
pub fn parse_app_with_lav(text: &str, lav: u32) -> Result<AppModel, Vec<AirError>> {
    let toks = lex(text).map_err(|e| vec![e])?;
    let mut p = Parser { toks, pos: 0, pending: Vec::new() };
    let model = p.app().map_err(|e| vec![e])?;
    let mut errors = p.pending;
    errors.extend(model.validate(lav));
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    pending: Vec<AirError>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: impl Into<String>) -> AirError {
        let t = self.peek();
        AirError::Syntax {
            line: t.line,
            col: t.col,
            expected: format!("{}, found {}", expected.into(), t.kind.describe()),
        }
    }

    fn at_word(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Word(w) if w == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), AirError> {
        if self.at_word(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("`{kw}`")))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, AirError> {
        match &self.peek().kind {
            TokKind::Word(w) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => Err(self.err(what)),
        }
    }

    fn int(&mut self, what: &str) -> Result<u32, AirError> {
        match self.peek().kind {
            TokKind::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.err(what)),
        }
    }

    fn punct(&mut self, kind: TokKind, what: &str) -> Result<(), AirError> {
        if self.peek().kind == kind {
            self.bump();
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn source(&mut self, what: &str) -> Result<Source, AirError> {
        match &self.peek().kind {
            TokKind::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(Source::Literal(s))
            }
            TokKind::Word(w) => {
                let w = w.clone();
                self.bump();
                Ok(Source::Var(w))
            }
            _ => Err(self.err(what)),
        }
    }

    fn app(&mut self) -> Result<AppModel, AirError> {
        self.expect_kw("app")?;
        let package = self.word("package name")?;
        self.expect_kw("targetSdk")?;
        let target_sdk = self.int("target SDK level")?;

        let mut permissions = BTreeSet::new();
        while self.at_word("uses-permission") {
            self.bump();
            let name = self.word("permission name")?;
            if !permissions.insert(name.clone()) {
                self.pending
                    .push(AirError::Invariant(format!("duplicate uses-permission {name}")));
            }
        }

        let mut components = Vec::new();
        loop {
            let kind = match &self.peek().kind {
                TokKind::Word(w) if w == "activity" => ComponentKind::Activity,
                TokKind::Word(w) if w == "service" => ComponentKind::Service,
                TokKind::Word(w) if w == "receiver" => ComponentKind::Receiver,
                _ => break,
            };
            self.bump();
            components.push(self.component(kind)?);
        }

        let mut methods = Vec::new();
        while self.at_word("method") {
            self.bump();
            methods.push(self.method()?);
        }

        if self.peek().kind != TokKind::Eof {
            return Err(self.err("`method` or end of input"));
        }
        Ok(AppModel {
            manifest: Manifest { package, target_sdk, permissions },
            components,
            methods,
        })
    }

    fn component(&mut self, kind: ComponentKind) -> Result<Component, AirError> {
        let name = self.word("component name")?;
        self.punct(TokKind::LBrace, "`{`")?;
        let mut callbacks = BTreeMap::new();
        while !matches!(self.peek().kind, TokKind::RBrace) {
            let kw = self.word("callback kind")?;
            let cb = CallbackKind::from_name(&kw).ok_or_else(|| self.err("callback kind"))?;
            self.punct(TokKind::Assign, "`=`")?;
            let target = self.word("method name")?;
            if callbacks.insert(cb, target).is_some() {
                self.pending.push(AirError::Invariant(format!(
                    "component {name} binds {cb} more than once"
                )));
            }
        }
        self.bump();
        Ok(Component { kind, name, callbacks })
    }

    fn method(&mut self) -> Result<Method, AirError> {
        let name = self.word("method name")?;
        self.punct(TokKind::LParen, "`(`")?;
        let mut params = Vec::new();
        if !matches!(self.peek().kind, TokKind::RParen) {
            loop {
                let pname = self.word("parameter name")?;
                self.punct(TokKind::Colon, "`:`")?;
                let tyw = self.word("parameter type")?;
                let ty = ParamType::from_keyword(&tyw)
                    .ok_or_else(|| self.err("`string`, `string_array`, `int`, or `opaque`"))?;
                params.push(Param { name: pname, ty });
                if matches!(self.peek().kind, TokKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.punct(TokKind::RParen, "`)`")?;
        self.punct(TokKind::LBrace, "`{`")?;
        let mut blocks = Vec::new();
        while self.at_word("block") {
            self.bump();
            blocks.push(self.block()?);
        }
        if blocks.is_empty() {
            return Err(self.err("`block`"));
        }
        self.punct(TokKind::RBrace, "`}`")?;
        Ok(Method { name, params, blocks })
    }

    fn block(&mut self) -> Result<Block, AirError> {
        let name = self.word("block name")?;
        self.punct(TokKind::Colon, "`:`")?;
        let mut stmts = Vec::new();
        let term = loop {
            if let Some(term) = self.try_terminator()? {
                break term;
            }
            match self.statement()? {
                Some(stmt) => stmts.push(stmt),
                None => return Err(self.err("statement or terminator")),
            }
        };
        Ok(Block { name, stmts, term })
    }

    fn try_terminator(&mut self) -> Result<Option<Terminator>, AirError> {
        let kw = match &self.peek().kind {
            TokKind::Word(w) => w.clone(),
            _ => return Ok(None),
        };
        let term = match kw.as_str() {
            "goto" => {
                self.bump();
                Terminator::Goto(self.word("block name")?)
            }
            "return" => {
                self.bump();
                Terminator::Return
            }
            "branch" => {
                self.bump();
                let cond = self.cond()?;
                let on_true = self.word("block name")?;
                let on_false = self.word("block name")?;
                Terminator::Branch { cond, on_true, on_false }
            }
            _ => return Ok(None),
        };
        Ok(Some(term))
    }

    fn cond(&mut self) -> Result<Cond, AirError> {
        let kw = self.word("branch condition")?;
        match kw.as_str() {
            "sdk" => {
                let op = match self.peek().kind {
                    TokKind::Cmp(op) => {
                        self.bump();
                        op
                    }
                    _ => return Err(self.err("comparison operator")),
                };
                let value = self.int("SDK level")?;
                Ok(Cond::Sdk { op, value })
            }
            "check_granted" => Ok(Cond::CheckGranted),
            "grant_result" => {
                let perm = self.word("permission name")?;
                Ok(Cond::GrantResult { perm })
            }
            _ => Err(self.err("`sdk`, `check_granted`, or `grant_result`")),
        }
    }

    /// Parse one statement, or return `None` when the next token does not
    /// start one (the caller decides whether that is an error).
    fn statement(&mut self) -> Result<Option<Statement>, AirError> {
        let kw = match &self.peek().kind {
            TokKind::Word(w) => w.clone(),
            _ => return Ok(None),
        };
        let stmt = match kw.as_str() {
            "def" => {
                self.bump();
                let var = self.word("variable name")?;
                self.punct(TokKind::Assign, "`=`")?;
                match &self.peek().kind {
                    TokKind::Str(s) => {
                        let value = s.clone();
                        self.bump();
                        Statement::DefString { var, value }
                    }
                    TokKind::Word(w) if w == "param" => {
                        self.bump();
                        let param = self.word("parameter name")?;
                        Statement::DefParam { var, param }
                    }
                    _ => return Err(self.err("string literal or `param`")),
                }
            }
            "array" => {
                self.bump();
                let var = self.word("variable name")?;
                self.punct(TokKind::Assign, "`=`")?;
                self.punct(TokKind::LBracket, "`[`")?;
                let mut items = Vec::new();
                if !matches!(self.peek().kind, TokKind::RBracket) {
                    loop {
                        items.push(self.source("array element")?);
                        if matches!(self.peek().kind, TokKind::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.punct(TokKind::RBracket, "`]`")?;
                Statement::DefArray { var, items }
            }
            "store" => {
                self.bump();
                let var = self.word("variable name")?;
                self.punct(TokKind::LBracket, "`[`")?;
                let index = self.int("array index")?;
                self.punct(TokKind::RBracket, "`]`")?;
                self.punct(TokKind::Assign, "`=`")?;
                let value = self.source("stored value")?;
                Statement::ArrayStore { var, index, value }
            }
            "call" => {
                self.bump();
                let target = self.word("method name")?;
                let args = self.arg_group()?;
                Statement::Call { target, args }
            }
            "dangerous" => {
                self.bump();
                self.dangerous()?
            }
            "check" => {
                self.bump();
                Statement::Check { perm: self.source("permission")? }
            }
            "request" => {
                self.bump();
                let perms = self.source("permissions")?;
                let code = self.int("request code")?;
                Statement::Request { perms, code }
            }
            "explain" => {
                self.bump();
                Statement::Explain { perm: self.source("permission")? }
            }
            "launch" => {
                self.bump();
                Statement::Launch { component: self.word("component name")? }
            }
            "trycatch_security" => {
                self.bump();
                self.punct(TokKind::LBrace, "`{`")?;
                let mut body = Vec::new();
                while !matches!(self.peek().kind, TokKind::RBrace) {
                    match self.statement()? {
                        Some(stmt) => body.push(stmt),
                        None => return Err(self.err("statement or `}`")),
                    }
                }
                self.bump();
                Statement::TryCatchSecurity { body }
            }
            _ => return Ok(None),
        };
        Ok(Some(stmt))
    }

    fn arg_group(&mut self) -> Result<Vec<Source>, AirError> {
        self.punct(TokKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if !matches!(self.peek().kind, TokKind::RParen) {
            loop {
                args.push(self.source("argument")?);
                if matches!(self.peek().kind, TokKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.punct(TokKind::RParen, "`)`")?;
        Ok(args)
    }

    /// `dangerous name(...)` has one parenthesised group when the signature
    /// takes no declared parameter types, two when it does: the first group is
    /// then the comma-separated type list and the second the arguments.
    fn dangerous(&mut self) -> Result<Statement, AirError> {
        let name = self.word("API name")?;
        let first = self.arg_group()?;
        if matches!(self.peek().kind, TokKind::LParen) {
            let mut types = Vec::with_capacity(first.len());
            for item in &first {
                match item {
                    Source::Var(w) => types.push(w.clone()),
                    Source::Literal(_) => return Err(self.err("type name in signature")),
                }
            }
            let args = self.arg_group()?;
            Ok(Statement::Dangerous { api: format!("{name}({})", types.join(",")), args })
        } else {
            Ok(Statement::Dangerous { api: format!("{name}()"), args: first })
        }
    }
}
