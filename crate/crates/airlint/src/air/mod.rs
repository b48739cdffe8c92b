//! AIR: a line-oriented textual representation of an Android app.
//!
//! An `.air` file declares a manifest header, components with callback
//! bindings, and methods made of named basic blocks. The model is immutable
//! after parsing; [`parse_app`] validates every structural invariant and
//! [`pretty_print`] emits canonical text that reparses to an equal model.
//!
//! Grammar reference lives in the repository README. The short version:
//!
//! ```text
//! app com.example.demo targetSdk 28
//!
//! uses-permission CAMERA
//!
//! activity MainActivity {
//!   onClick = handleClick
//! }
//!
//! method handleClick() {
//!   block entry:
//!     def v = "CAMERA"
//!     check v
//!     branch check_granted ok out
//!   block ok:
//!     dangerous openCamera(v)
//!     goto out
//!   block out:
//!     return
//! }
//! ```

mod lexer;
mod parser;
mod print;
mod validate;

pub use parser::{parse_app, parse_app_with_lav};
pub use print::pretty_print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum AirError {
    #[error("{line}:{col}: syntax error: expected {expected}")]
    Syntax { line: u32, col: u32, expected: String },
    #[error("unresolved symbol: {0}")]
    Resolution(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Activity,
    Service,
    Receiver,
}

impl ComponentKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ComponentKind::Activity => "activity",
            ComponentKind::Service => "service",
            ComponentKind::Receiver => "receiver",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Callback kinds a component may bind. Declaration order is lifecycle order,
/// which is also the derived `Ord` used when printing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CallbackKind {
    OnCreate,
    OnStart,
    OnResume,
    OnPause,
    OnStop,
    OnDestroy,
    OnClick,
    OnRequestPermissionsResult,
    Run,
}

pub const ALL_CALLBACK_KINDS: [CallbackKind; 9] = [
    CallbackKind::OnCreate,
    CallbackKind::OnStart,
    CallbackKind::OnResume,
    CallbackKind::OnPause,
    CallbackKind::OnStop,
    CallbackKind::OnDestroy,
    CallbackKind::OnClick,
    CallbackKind::OnRequestPermissionsResult,
    CallbackKind::Run,
];

impl CallbackKind {
    pub fn name(self) -> &'static str {
        match self {
            CallbackKind::OnCreate => "onCreate",
            CallbackKind::OnStart => "onStart",
            CallbackKind::OnResume => "onResume",
            CallbackKind::OnPause => "onPause",
            CallbackKind::OnStop => "onStop",
            CallbackKind::OnDestroy => "onDestroy",
            CallbackKind::OnClick => "onClick",
            CallbackKind::OnRequestPermissionsResult => "onRequestPermissionsResult",
            CallbackKind::Run => "run",
        }
    }

    pub fn from_name(s: &str) -> Option<CallbackKind> {
        ALL_CALLBACK_KINDS.iter().copied().find(|k| k.name() == s)
    }

    /// Which kinds a component of `kind` may bind. Activities take everything;
    /// services and receivers get the subset that exists for them on the
    /// platform (`onRequestPermissionsResult` is activity-only).
    pub fn valid_for(self, kind: ComponentKind) -> bool {
        match kind {
            ComponentKind::Activity => true,
            ComponentKind::Service => matches!(
                self,
                CallbackKind::OnCreate
                    | CallbackKind::OnStart
                    | CallbackKind::OnDestroy
                    | CallbackKind::Run
            ),
            ComponentKind::Receiver => {
                matches!(self, CallbackKind::OnCreate | CallbackKind::Run)
            }
        }
    }
}

impl fmt::Display for CallbackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub package: String,
    pub target_sdk: u32,
    pub permissions: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub kind: ComponentKind,
    pub name: String,
    /// Callback bindings to declared method names.
    pub callbacks: BTreeMap<CallbackKind, String>,
}

impl Component {
    /// Package of this component: the dotted prefix of its name when the name
    /// is qualified, otherwise the manifest package.
    pub fn package<'a>(&'a self, manifest: &'a Manifest) -> &'a str {
        match self.name.rfind('.') {
            Some(i) => &self.name[..i],
            None => &manifest.package,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamType {
    Str,
    StrArray,
    Int,
    Opaque,
}

impl ParamType {
    pub fn keyword(self) -> &'static str {
        match self {
            ParamType::Str => "string",
            ParamType::StrArray => "string_array",
            ParamType::Int => "int",
            ParamType::Opaque => "opaque",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ParamType> {
        match s {
            "string" => Some(ParamType::Str),
            "string_array" => Some(ParamType::StrArray),
            "int" => Some(ParamType::Int),
            "opaque" => Some(ParamType::Opaque),
            _ => None,
        }
    }

    /// Whether dataflow facts are tracked through a parameter of this type.
    pub fn carries_strings(self) -> bool {
        matches!(self, ParamType::Str | ParamType::StrArray)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: ParamType,
}

/// A string-valued operand: a quoted literal or a variable reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Literal(String),
    Var(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Literal(s) => write!(f, "\"{s}\""),
            Source::Var(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    DefString { var: String, value: String },
    DefParam { var: String, param: String },
    DefArray { var: String, items: Vec<Source> },
    ArrayStore { var: String, index: u32, value: Source },
    Call { target: String, args: Vec<Source> },
    Dangerous { api: String, args: Vec<Source> },
    Check { perm: Source },
    Request { perms: Source, code: u32 },
    Explain { perm: Source },
    Launch { component: String },
    TryCatchSecurity { body: Vec<Statement> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn eval(self, lhs: u32, rhs: u32) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    /// Runtime-version comparison against a constant (`sdk >= 29`).
    Sdk { op: CmpOp, value: u32 },
    /// Consumes the result of the last `check` in the same block.
    CheckGranted,
    /// Tests the HANDLE callback's grant results for one permission.
    GrantResult { perm: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminator {
    Goto(String),
    Branch { cond: Cond, on_true: String, on_false: String },
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub stmts: Vec<Statement>,
    pub term: Terminator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub name: String,
    pub params: Vec<Param>,
    /// The first block is the entry block.
    pub blocks: Vec<Block>,
}

impl Method {
    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Flattened statement sites of one block, nested `trycatch_security`
    /// bodies included, in execution order.
    pub fn block_sites<'a>(&'a self, block: &'a Block) -> Vec<SiteRef<'a>> {
        let mut out = Vec::new();
        fn walk<'a>(
            method: &str,
            block: &str,
            stmts: &'a [Statement],
            prefix: &mut Vec<u32>,
            out: &mut Vec<SiteRef<'a>>,
        ) {
            for (i, stmt) in stmts.iter().enumerate() {
                prefix.push(i as u32);
                if let Statement::TryCatchSecurity { body } = stmt {
                    walk(method, block, body, prefix, out);
                } else {
                    out.push(SiteRef {
                        site: SiteId {
                            method: method.to_string(),
                            block: block.to_string(),
                            stmt: prefix.clone(),
                        },
                        stmt,
                    });
                }
                prefix.pop();
            }
        }
        walk(&self.name, &block.name, &block.stmts, &mut Vec::new(), &mut out);
        out
    }

    /// All statement sites of the method in block order.
    pub fn sites(&self) -> Vec<SiteRef<'_>> {
        self.blocks.iter().flat_map(|b| self.block_sites(b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppModel {
    pub manifest: Manifest,
    pub components: Vec<Component>,
    pub methods: Vec<Method>,
}

impl AppModel {
    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Methods not bound as any component callback.
    pub fn free_methods(&self) -> impl Iterator<Item = &Method> {
        let bound: BTreeSet<&str> = self
            .components
            .iter()
            .flat_map(|c| c.callbacks.values().map(String::as_str))
            .collect();
        self.methods.iter().filter(move |m| !bound.contains(m.name.as_str()))
    }

    /// Whether `method` is bound with `kind` by at least one component.
    pub fn is_bound_as(&self, method: &str, kind: CallbackKind) -> bool {
        self.components
            .iter()
            .any(|c| c.callbacks.get(&kind).map(String::as_str) == Some(method))
    }

    /// Resolve a site id to its statement.
    pub fn stmt_at(&self, site: &SiteId) -> Option<&Statement> {
        let method = self.method(&site.method)?;
        let block = &method.blocks[method.block_index(&site.block)?];
        let mut stmts = &block.stmts;
        let (last, path) = site.stmt.split_last()?;
        for idx in path {
            match stmts.get(*idx as usize)? {
                Statement::TryCatchSecurity { body } => stmts = body,
                _ => return None,
            }
        }
        stmts.get(*last as usize)
    }

    /// Validate all structural invariants; empty result means the model is valid.
    pub fn validate(&self, lav: u32) -> Vec<AirError> {
        validate::validate(self, lav)
    }
}

/// Stable address of a statement: method, block, and the index path through
/// any enclosing `trycatch_security` regions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteId {
    pub method: String,
    pub block: String,
    pub stmt: Vec<u32>,
}

impl SiteId {
    /// True when the statement sits inside at least one trycatch region.
    pub fn is_nested(&self) -> bool {
        self.stmt.len() > 1
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:", self.method, self.block)?;
        for (i, idx) in self.stmt.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// A statement together with its site id.
#[derive(Debug, Clone)]
pub struct SiteRef<'a> {
    pub site: SiteId,
    pub stmt: &'a Statement,
}
