//! Declaration scanner and name resolver for a Java-like source subset.
//!
//! Parsing is per file and produces a [`FileModel`]: the package, imports,
//! declarations and every dotted name mention with its syntactic role.
//! [`link`] then assigns fully-qualified names across all files and resolves
//! mentions through each file's import table.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{CodeElement, Diagnostic, DiagnosticLevel, ElementKind, FactSet, SourceSpan, UsageFact, UsageKind};

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "true", "false", "null",
];

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default", "sealed",
];

/// Implicitly imported `java.lang` types. Simple names in this set are never
/// resolved through wildcard imports.
const JAVA_LANG: &[&str] = &[
    "AbstractMethodError", "Appendable", "ArithmeticException", "ArrayIndexOutOfBoundsException",
    "ArrayStoreException", "AssertionError", "AutoCloseable", "Boolean", "Byte", "CharSequence",
    "Character", "Class", "ClassCastException", "ClassLoader", "ClassNotFoundException",
    "CloneNotSupportedException", "Cloneable", "Comparable", "Deprecated", "Double", "Enum",
    "Error", "Exception", "Float", "FunctionalInterface", "IllegalAccessException",
    "IllegalArgumentException", "IllegalMonitorStateException", "IllegalStateException",
    "IndexOutOfBoundsException", "InstantiationException", "Integer", "InterruptedException",
    "Iterable", "LinkageError", "Long", "Math", "NegativeArraySizeException",
    "NoSuchFieldException", "NoSuchMethodException", "NullPointerException", "Number",
    "NumberFormatException", "Object", "OutOfMemoryError", "Override", "Package", "Process",
    "ProcessBuilder", "Readable", "Record", "ReflectiveOperationException", "Runnable", "Runtime",
    "RuntimeException", "SafeVarargs", "SecurityException", "SecurityManager", "Short",
    "StackOverflowError", "StrictMath", "String", "StringBuffer", "StringBuilder",
    "StringIndexOutOfBoundsException", "SuppressWarnings", "System", "Thread", "ThreadGroup",
    "ThreadLocal", "Throwable", "TypeNotPresentException", "UnsupportedOperationException",
    "Void",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Upper-case initial plus at least one lower-case letter: excludes type
/// parameters (`T`) and constants (`MAX_SIZE`).
fn is_type_like(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase) && s.chars().any(char::is_lowercase)
}

fn starts_lowercase(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_lowercase)
}

#[derive(Debug, Clone)]
struct Seg {
    name: String,
    start: Pos,
    end: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Extends,
    Implements,
    Annotation,
    New,
    /// Type position in a declaration header or signature.
    Type,
    Expr,
}

#[derive(Debug, Clone)]
struct Mention {
    owner: usize,
    segs: Vec<Seg>,
    role: Role,
    /// Directly followed by `(`.
    call: bool,
}

#[derive(Debug, Clone)]
struct Import {
    name: String,
    wildcard: bool,
    is_static: bool,
    start: Pos,
    end: Pos,
}

#[derive(Debug, Clone)]
struct Decl {
    kind: ElementKind,
    name: String,
    parent: Option<usize>,
    start: Pos,
    end: Pos,
}

#[derive(Debug, Clone)]
pub(crate) struct FileModel {
    file: String,
    package: Option<(String, Pos, Pos)>,
    imports: Vec<Import>,
    decls: Vec<Decl>,
    mentions: Vec<Mention>,
}

const PENDING: usize = usize::MAX;

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    model: FileModel,
}

pub(crate) fn parse_file(file: &str, text: &str) -> FileModel {
    let toks = tokenize(text);
    let mut p = Parser {
        toks: &toks,
        i: 0,
        model: FileModel {
            file: file.to_string(),
            package: None,
            imports: Vec::new(),
            decls: Vec::new(),
            mentions: Vec::new(),
        },
    };
    p.compilation_unit();
    p.model
}

impl<'a> Parser<'a> {
    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.toks.get(i)
    }

    fn punct_at(&self, i: usize, c: char) -> bool {
        self.tok(i).is_some_and(|t| t.is_punct(c))
    }

    fn ident_at(&self, i: usize) -> Option<&'a str> {
        self.tok(i).and_then(Token::ident)
    }

    fn is_ident_at(&self, i: usize, s: &str) -> bool {
        self.ident_at(i) == Some(s)
    }

    fn last_end(&self) -> Pos {
        self.toks.last().map_or(Pos { line: 1, col: 1 }, |t| t.end)
    }

    /// Index of the token closing the bracket opened at `open`, or the last
    /// token index when unbalanced.
    fn matching(&self, open: usize) -> usize {
        let (o, c) = match &self.toks[open].tok {
            Tok::Punct('{') => ('{', '}'),
            Tok::Punct('(') => ('(', ')'),
            Tok::Punct('[') => ('[', ']'),
            _ => return open,
        };
        let mut depth = 0usize;
        for (k, t) in self.toks.iter().enumerate().skip(open) {
            if t.is_punct(o) {
                depth += 1;
            } else if t.is_punct(c) {
                depth -= 1;
                if depth == 0 {
                    return k;
                }
            }
        }
        self.toks.len().saturating_sub(1)
    }

    /// `non-sealed` spans three tokens.
    fn modifier_len(&self, i: usize) -> usize {
        match self.ident_at(i) {
            Some(m) if MODIFIERS.contains(&m) => {
                if m == "static" && self.punct_at(i + 1, '{') {
                    0
                } else {
                    1
                }
            }
            Some("non") if self.punct_at(i + 1, '-') && self.is_ident_at(i + 2, "sealed") => 3,
            _ => 0,
        }
    }

    fn type_keyword_at(&self, i: usize) -> bool {
        match self.ident_at(i) {
            Some("class" | "interface" | "enum") => true,
            Some("record") => {
                self.ident_at(i + 1).is_some_and(|n| !is_keyword(n))
                    && (self.punct_at(i + 2, '(') || self.punct_at(i + 2, '<'))
            }
            _ => self.punct_at(i, '@') && self.is_ident_at(i + 1, "interface"),
        }
    }

    /// Reads `ident (. ident)*` starting at `i`. Returns the segments and the
    /// index after the chain.
    fn chain(&self, mut i: usize) -> (Vec<Seg>, usize) {
        let mut segs = Vec::new();
        if let Some(t) = self.tok(i) {
            if let Some(name) = t.ident() {
                segs.push(Seg {
                    name: name.to_string(),
                    start: t.start,
                    end: t.end,
                });
                i += 1;
            }
        }
        while self.punct_at(i, '.') {
            match self.tok(i + 1) {
                Some(t) => match t.ident() {
                    Some(name) if !is_keyword(name) => {
                        segs.push(Seg {
                            name: name.to_string(),
                            start: t.start,
                            end: t.end,
                        });
                        i += 2;
                    }
                    _ => break,
                },
                None => break,
            }
        }
        (segs, i)
    }

    fn push_mention(&mut self, owner: usize, segs: Vec<Seg>, role: Role, call: bool) {
        if !segs.is_empty() {
            self.model.mentions.push(Mention {
                owner,
                segs,
                role,
                call,
            });
        }
    }

    fn compilation_unit(&mut self) {
        let mut pending: Vec<Mention> = Vec::new();
        let mut decl_start: Option<Pos> = None;
        while self.i < self.toks.len() {
            let t = &self.toks[self.i];
            if t.is_ident("package") {
                let (segs, next) = self.chain(self.i + 1);
                let end = self.tok(next).filter(|t| t.is_punct(';')).map_or_else(
                    || segs.last().map_or(t.end, |s| s.end),
                    |semi| semi.end,
                );
                if !segs.is_empty() && self.model.package.is_none() {
                    let name = join(&segs);
                    self.model.package = Some((name, t.start, end));
                }
                self.i = next + 1;
            } else if t.is_ident("import") {
                self.import();
            } else if t.is_punct('@') && !self.is_ident_at(self.i + 1, "interface") {
                decl_start.get_or_insert(t.start);
                pending.extend(self.annotation(PENDING));
            } else if self.type_keyword_at(self.i) {
                let start = decl_start.take().unwrap_or(t.start);
                self.type_decl(None, start, std::mem::take(&mut pending));
            } else if self.modifier_len(self.i) > 0 {
                decl_start.get_or_insert(t.start);
                self.i += self.modifier_len(self.i);
            } else {
                self.i += 1;
            }
        }
    }

    fn import(&mut self) {
        let mut i = self.i + 1;
        let is_static = self.is_ident_at(i, "static");
        if is_static {
            i += 1;
        }
        let (segs, mut next) = self.chain(i);
        let mut wildcard = false;
        if self.punct_at(next, '.') && self.punct_at(next + 1, '*') {
            wildcard = true;
            next += 2;
        }
        if let (Some(first), Some(last)) = (segs.first(), segs.last()) {
            let end = if wildcard { self.toks[next - 1].end } else { last.end };
            self.model.imports.push(Import {
                name: join(&segs),
                wildcard,
                is_static,
                start: first.start,
                end,
            });
        }
        self.i = next.max(self.i + 1);
        if self.punct_at(self.i, ';') {
            self.i += 1;
        }
    }

    /// Parses `@Name` or `@Name(args)` at the cursor. The annotation mention
    /// and any mentions inside its arguments are returned with `owner`.
    fn annotation(&mut self, owner: usize) -> Vec<Mention> {
        let before = self.model.mentions.len();
        let (segs, mut next) = self.chain(self.i + 1);
        if segs.is_empty() {
            self.i += 1;
            return Vec::new();
        }
        self.push_mention(owner, segs, Role::Annotation, false);
        if self.punct_at(next, '(') {
            let close = self.matching(next);
            self.scan_expr(next + 1, close, owner);
            next = close + 1;
        }
        self.i = next;
        self.model.mentions.split_off(before)
    }

    fn attach(&mut self, pending: Vec<Mention>, owner: usize) {
        for mut m in pending {
            m.owner = owner;
            self.model.mentions.push(m);
        }
    }

    fn new_decl(&mut self, kind: ElementKind, name: &str, parent: Option<usize>, start: Pos) -> usize {
        self.model.decls.push(Decl {
            kind,
            name: name.to_string(),
            parent,
            start,
            end: start,
        });
        self.model.decls.len() - 1
    }

    fn type_decl(&mut self, parent: Option<usize>, start: Pos, pending: Vec<Mention>) {
        let (kind, is_enum) = if self.punct_at(self.i, '@') {
            self.i += 2;
            (ElementKind::Interface, false)
        } else {
            let kw = self.ident_at(self.i).unwrap_or_default();
            self.i += 1;
            match kw {
                "interface" => (ElementKind::Interface, false),
                "enum" => (ElementKind::Class, true),
                _ => (ElementKind::Class, false),
            }
        };
        let name = match self.ident_at(self.i) {
            Some(n) if !is_keyword(n) => n.to_string(),
            _ => return,
        };
        self.i += 1;
        let idx = self.new_decl(kind, &name, parent, start);
        self.attach(pending, idx);

        let mut clause = Role::Type;
        let (mut angle, mut paren) = (0i32, 0i32);
        loop {
            let Some(t) = self.tok(self.i) else {
                self.model.decls[idx].end = self.last_end();
                return;
            };
            match &t.tok {
                Tok::Punct('{') if angle <= 0 && paren <= 0 => break,
                Tok::Punct(';') | Tok::Punct('}') if angle <= 0 && paren <= 0 => {
                    self.model.decls[idx].end = t.end;
                    self.i += 1;
                    return;
                }
                Tok::Punct('<') => angle += 1,
                Tok::Punct('>') => angle -= 1,
                Tok::Punct('(') => paren += 1,
                Tok::Punct(')') => paren -= 1,
                Tok::Punct('@') => {
                    let ms = self.annotation(idx);
                    self.attach(ms, idx);
                    continue;
                }
                Tok::Ident(w) if angle <= 0 && paren <= 0 && w == "extends" => clause = Role::Extends,
                Tok::Ident(w) if angle <= 0 && paren <= 0 && w == "implements" => {
                    clause = Role::Implements
                }
                Tok::Ident(w) if angle <= 0 && paren <= 0 && w == "permits" => clause = Role::Type,
                Tok::Ident(w) if !is_keyword(w) => {
                    let (segs, next) = self.chain(self.i);
                    let role = if angle <= 0 && paren <= 0 { clause } else { Role::Type };
                    self.push_mention(idx, segs, role, false);
                    self.i = next;
                    continue;
                }
                _ => {}
            }
            self.i += 1;
        }
        let close = self.class_body(idx, is_enum);
        self.model.decls[idx].end = self.toks[close].end;
    }

    /// Cursor at `{`. Returns the index of the closing `}` and leaves the
    /// cursor after it.
    fn class_body(&mut self, owner: usize, is_enum: bool) -> usize {
        let open = self.i;
        let close = self.matching(open);
        self.i = open + 1;
        if is_enum {
            while self.i < close {
                let t = &self.toks[self.i];
                if t.is_punct(';') {
                    self.i += 1;
                    break;
                }
                if t.is_punct('@') {
                    let ms = self.annotation(owner);
                    self.attach(ms, owner);
                    continue;
                }
                if t.is_punct('(') || t.is_punct('{') {
                    let c = self.matching(self.i);
                    self.scan_expr(self.i + 1, c, owner);
                    self.i = c + 1;
                    continue;
                }
                self.i += 1;
            }
        }
        let mut pending: Vec<Mention> = Vec::new();
        let mut member_start: Option<Pos> = None;
        while self.i < close {
            let t = &self.toks[self.i];
            if t.is_punct(';') {
                self.i += 1;
                self.attach(std::mem::take(&mut pending), owner);
                member_start = None;
            } else if t.is_punct('@') && !self.is_ident_at(self.i + 1, "interface") {
                member_start.get_or_insert(t.start);
                pending.extend(self.annotation(PENDING));
            } else if t.is_punct('{') {
                let c = self.matching(self.i);
                self.scan_expr(self.i + 1, c, owner);
                self.attach(std::mem::take(&mut pending), owner);
                member_start = None;
                self.i = c + 1;
            } else if self.type_keyword_at(self.i) {
                let start = member_start.take().unwrap_or(t.start);
                self.type_decl(Some(owner), start, std::mem::take(&mut pending));
            } else if self.modifier_len(self.i) > 0 {
                member_start.get_or_insert(t.start);
                self.i += self.modifier_len(self.i);
            } else if t.is_ident("static") {
                self.i += 1;
            } else {
                let start = member_start.take().unwrap_or(t.start);
                self.member(owner, start, std::mem::take(&mut pending), close);
            }
        }
        self.i = close + 1;
        close
    }

    fn member(&mut self, owner: usize, start: Pos, pending: Vec<Mention>, limit: usize) {
        let from = self.i;
        let mut j = from;
        let mut angle = 0i32;
        let decider = loop {
            if j >= limit {
                break None;
            }
            let t = &self.toks[j];
            match &t.tok {
                Tok::Punct('<') => angle += 1,
                Tok::Punct('>') => angle -= 1,
                Tok::Punct('[') => {
                    j = self.matching(j);
                }
                Tok::Punct('@') => {
                    // type annotation inside a header; skip its argument list
                    let (_, next) = self.chain(j + 1);
                    j = if self.punct_at(next, '(') { self.matching(next) } else { next - 1 };
                }
                Tok::Punct(c @ ('(' | '=' | ';' | ',' | '{' | '}')) if angle <= 0 => break Some(*c),
                _ => {}
            }
            j += 1;
        };
        match decider {
            Some('(') if self.ident_at(j - 1).is_some_and(|n| !is_keyword(n)) && j > from => {
                let name = self.ident_at(j - 1).unwrap_or_default().to_string();
                let idx = self.new_decl(ElementKind::Method, &name, Some(owner), start);
                self.attach(pending, idx);
                self.scan_types(from, j - 1, idx);
                let close_params = self.matching(j);
                self.scan_types(j + 1, close_params, idx);
                let mut k = close_params + 1;
                while k < limit && !self.punct_at(k, '{') && !self.punct_at(k, ';') {
                    k += 1;
                }
                self.scan_types(close_params + 1, k, idx);
                if self.punct_at(k, '{') {
                    let body_close = self.matching(k);
                    self.scan_expr(k + 1, body_close, idx);
                    self.model.decls[idx].end = self.toks[body_close].end;
                    self.i = body_close + 1;
                } else {
                    let end_tok = k.min(self.toks.len() - 1);
                    self.model.decls[idx].end = self.toks[end_tok].end;
                    self.i = k + 1;
                }
            }
            Some('=' | ';' | ',') => self.fields(owner, start, pending, from, j, limit),
            Some('{') => {
                let c = self.matching(j);
                self.scan_expr(from, c, owner);
                self.attach(pending, owner);
                self.i = c + 1;
            }
            _ => {
                self.scan_expr(from, j.min(limit), owner);
                self.attach(pending, owner);
                self.i = (j + 1).max(from + 1);
            }
        }
    }

    /// `type name [= init] (, name [= init])* ;` starting at `from`; `first`
    /// is the index of the first `=`, `,` or `;`.
    fn fields(&mut self, owner: usize, start: Pos, pending: Vec<Mention>, from: usize, first: usize, limit: usize) {
        let name_at = |p: &Self, mut k: usize| -> Option<usize> {
            // skip trailing `[]` on the declarator
            while k > from && p.punct_at(k, ']') {
                k = k.saturating_sub(2);
            }
            p.ident_at(k).filter(|n| !is_keyword(n)).map(|_| k)
        };
        let Some(first_name) = name_at(self, first - 1).filter(|&k| k > from) else {
            self.scan_expr(from, first, owner);
            self.attach(pending, owner);
            self.i = first + 1;
            return;
        };
        let mut declarators: Vec<(usize, Option<(usize, usize)>)> = Vec::new();
        let mut name_idx = first_name;
        let mut k = first;
        loop {
            let mut init = None;
            if self.punct_at(k, '=') {
                let s = k + 1;
                let mut e = s;
                while e < limit && !self.punct_at(e, ',') && !self.punct_at(e, ';') {
                    if self.punct_at(e, '(') || self.punct_at(e, '{') || self.punct_at(e, '[') {
                        e = self.matching(e);
                    }
                    e += 1;
                }
                init = Some((s, e));
                k = e;
            }
            declarators.push((name_idx, init));
            if self.punct_at(k, ',') {
                let mut n = k + 1;
                while n < limit && !matches!(self.toks[n].tok, Tok::Punct('=' | ',' | ';')) {
                    n += 1;
                }
                match name_at(self, n.saturating_sub(1)).filter(|&x| x > k) {
                    Some(x) => {
                        name_idx = x;
                        k = n;
                    }
                    None => break,
                }
            } else {
                break;
            }
        }
        let end_idx = k.min(self.toks.len() - 1);
        let end = self.toks[end_idx].end;
        let mut first_decl = None;
        for (name_idx, init) in declarators {
            let name = self.ident_at(name_idx).unwrap_or_default().to_string();
            let idx = self.new_decl(ElementKind::Field, &name, Some(owner), start);
            self.model.decls[idx].end = end;
            self.scan_types(from, first_name, idx);
            if let Some((s, e)) = init {
                self.scan_expr(s, e, idx);
            }
            first_decl.get_or_insert(idx);
        }
        if let Some(idx) = first_decl {
            self.attach(pending, idx);
        }
        self.i = k + 1;
    }

    /// Type positions: every chain is a `Type` mention.
    fn scan_types(&mut self, from: usize, to: usize, owner: usize) {
        let mut k = from;
        while k < to {
            let t = &self.toks[k];
            if t.is_punct('@') {
                let save = self.i;
                self.i = k;
                let ms = self.annotation(owner);
                self.attach(ms, owner);
                k = self.i;
                self.i = save;
                continue;
            }
            match t.ident() {
                Some(w) if !is_keyword(w) && !self.punct_at(k.wrapping_sub(1), '.') => {
                    let (segs, next) = self.chain(k);
                    self.push_mention(owner, segs, Role::Type, false);
                    k = next;
                }
                _ => k += 1,
            }
        }
    }

    /// Expression/statement tokens in `[from, to)`.
    fn scan_expr(&mut self, from: usize, to: usize, owner: usize) {
        let mut k = from;
        while k < to {
            let t = &self.toks[k];
            if t.is_punct('@') && self.ident_at(k + 1).is_some_and(|n| n != "interface") {
                let (segs, next) = self.chain(k + 1);
                self.push_mention(owner, segs, Role::Annotation, false);
                k = next;
                continue;
            }
            let Some(w) = t.ident() else {
                k += 1;
                continue;
            };
            let head_ok = !is_keyword(w) || w == "this" || w == "super";
            let after_dot = k > 0 && self.punct_at(k - 1, '.');
            let method_ref = k > 1 && self.punct_at(k - 1, ':') && self.punct_at(k - 2, ':');
            if !head_ok || after_dot || method_ref {
                k += 1;
                continue;
            }
            let (segs, next) = self.chain(k);
            let role = if k > 0 && self.is_ident_at(k - 1, "new") {
                Role::New
            } else {
                Role::Expr
            };
            let call = self.punct_at(next, '(');
            self.push_mention(owner, segs, role, call);
            k = next.max(k + 1);
        }
    }
}

fn join(segs: &[Seg]) -> String {
    segs.iter()
        .map(|s| s.name.as_str())
        .collect::<Vec<_>>()
        .join(".")
}

#[derive(Default)]
struct TypeInfo {
    /// method simple name → fq name of its first declaration
    methods: BTreeMap<String, String>,
}

struct Project {
    types: HashMap<String, TypeInfo>,
    /// package ("" for the default package) → simple name → fq name
    package_types: HashMap<String, BTreeMap<String, String>>,
}

struct Linked {
    model: FileModel,
    fq: Vec<String>,
}

/// Assigns names across files and resolves mentions into usage facts.
/// Files whose type names collide with an earlier file are skipped with an
/// error diagnostic.
pub(crate) fn link(mut models: Vec<FileModel>) -> (FactSet, Vec<Diagnostic>) {
    models.sort_by(|a, b| a.file.cmp(&b.file));
    let mut diags = Vec::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut packages: BTreeMap<String, CodeElement> = BTreeMap::new();
    let mut linked: Vec<Linked> = Vec::new();

    for model in models {
        let pkg = model.package.as_ref().map(|p| p.0.clone());
        // type names first, so a collision skips the file before any state changes
        let mut fq: Vec<String> = vec![String::new(); model.decls.len()];
        let mut collision = None;
        let mut local_types = BTreeSet::new();
        for (i, d) in model.decls.iter().enumerate() {
            if !d.kind.is_type() {
                continue;
            }
            let base = match d.parent {
                Some(p) => fq[p].clone(),
                None => pkg.clone().unwrap_or_default(),
            };
            fq[i] = qualify(&base, &d.name);
            if used.contains(&fq[i]) || !local_types.insert(fq[i].clone()) {
                collision.get_or_insert_with(|| fq[i].clone());
            }
        }
        if let Some(name) = collision {
            diags.push(Diagnostic {
                level: DiagnosticLevel::Error,
                file: model.file.clone(),
                message: format!("skipped: duplicate declaration of {name}"),
            });
            continue;
        }
        if let Some((name, start, end)) = &model.package {
            if used.contains(name) && !packages.contains_key(name) {
                diags.push(Diagnostic {
                    level: DiagnosticLevel::Error,
                    file: model.file.clone(),
                    message: format!("skipped: package {name} collides with a type name"),
                });
                continue;
            }
            packages.entry(name.clone()).or_insert_with(|| CodeElement {
                kind: ElementKind::Package,
                fq_name: name.clone(),
                span: span(&model.file, *start, *end),
                parent: None,
            });
            used.insert(name.clone());
        }
        used.extend(local_types);
        for (i, d) in model.decls.iter().enumerate() {
            if d.kind.is_type() {
                continue;
            }
            let parent_fq = &fq[d.parent.expect("members have a parent")];
            let base = qualify(parent_fq, &d.name);
            let mut name = base.clone();
            let mut n = 2;
            while used.contains(&name) {
                name = format!("{base}${n}");
                n += 1;
            }
            used.insert(name.clone());
            fq[i] = name;
        }
        linked.push(Linked { model, fq });
    }

    let mut project = Project {
        types: HashMap::new(),
        package_types: HashMap::new(),
    };
    for l in &linked {
        let pkg = l.model.package.as_ref().map_or("", |p| p.0.as_str());
        for (i, d) in l.model.decls.iter().enumerate() {
            if d.kind.is_type() {
                project.types.entry(l.fq[i].clone()).or_default();
                if d.parent.is_none() {
                    project
                        .package_types
                        .entry(pkg.to_string())
                        .or_default()
                        .insert(d.name.clone(), l.fq[i].clone());
                }
            }
        }
        for (i, d) in l.model.decls.iter().enumerate() {
            if d.kind == ElementKind::Method {
                let owner = &l.fq[d.parent.expect("methods have a parent")];
                project
                    .types
                    .get_mut(owner)
                    .expect("owner type registered")
                    .methods
                    .entry(d.name.clone())
                    .or_insert_with(|| l.fq[i].clone());
            }
        }
    }

    let mut set = FactSet::default();
    set.elements.extend(packages.into_values());
    for l in &linked {
        let model = &l.model;
        let pkg_name = model.package.as_ref().map(|p| p.0.clone());
        for (i, d) in model.decls.iter().enumerate() {
            let parent = match d.parent {
                Some(p) => Some(l.fq[p].clone()),
                None => pkg_name.clone(),
            };
            set.elements.push(CodeElement {
                kind: d.kind,
                fq_name: l.fq[i].clone(),
                span: span(&model.file, d.start, d.end),
                parent,
            });
        }
        let mut resolver = Resolver::new(l, &project);
        resolver.imports(&mut set.facts, &mut diags);
        for m in &model.mentions {
            if m.owner == PENDING {
                continue;
            }
            if let Some(fact) = resolver.resolve(m) {
                set.facts.push(fact);
            }
        }
        diags.extend(resolver.diags);
    }
    (set, diags)
}

fn qualify(base: &str, name: &str) -> String {
    if base.is_empty() {
        name.to_string()
    } else {
        format!("{base}.{name}")
    }
}

fn span(file: &str, start: Pos, end: Pos) -> SourceSpan {
    SourceSpan {
        file: file.to_string(),
        start_line: start.line,
        start_col: start.col,
        end_line: end.line,
        end_col: end.col,
    }
}

struct Resolver<'a> {
    linked: &'a Linked,
    project: &'a Project,
    package: String,
    single: BTreeMap<String, String>,
    static_members: BTreeMap<String, String>,
    wildcards: Vec<String>,
    local_types: BTreeMap<String, String>,
    diags: Vec<Diagnostic>,
    warned: BTreeSet<String>,
}

impl<'a> Resolver<'a> {
    fn new(linked: &'a Linked, project: &'a Project) -> Self {
        let model = &linked.model;
        let mut single = BTreeMap::new();
        let mut static_members = BTreeMap::new();
        let mut wildcards = Vec::new();
        for imp in &model.imports {
            let simple = imp.name.rsplit('.').next().unwrap_or_default().to_string();
            match (imp.is_static, imp.wildcard) {
                (false, false) => {
                    single.entry(simple).or_insert_with(|| imp.name.clone());
                }
                (false, true) => {
                    if !wildcards.contains(&imp.name) {
                        wildcards.push(imp.name.clone());
                    }
                }
                (true, false) => {
                    static_members.entry(simple).or_insert_with(|| imp.name.clone());
                }
                (true, true) => {}
            }
        }
        let mut local_types = BTreeMap::new();
        for (i, d) in model.decls.iter().enumerate() {
            if d.kind.is_type() {
                local_types
                    .entry(d.name.clone())
                    .or_insert_with(|| linked.fq[i].clone());
            }
        }
        Resolver {
            linked,
            project,
            package: model.package.as_ref().map(|p| p.0.clone()).unwrap_or_default(),
            single,
            static_members,
            wildcards,
            local_types,
            diags: Vec::new(),
            warned: BTreeSet::new(),
        }
    }

    fn file(&self) -> &str {
        &self.linked.model.file
    }

    /// Import facts go to the file's primary type (named after the file,
    /// else the first top-level type), else to the package.
    fn imports(&mut self, facts: &mut Vec<UsageFact>, diags: &mut Vec<Diagnostic>) {
        let model = &self.linked.model;
        if model.imports.is_empty() {
            return;
        }
        let stem = model
            .file
            .rsplit('/')
            .next()
            .unwrap_or_default()
            .split('.')
            .next()
            .unwrap_or_default();
        let top: Vec<usize> = model
            .decls
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind.is_type() && d.parent.is_none())
            .map(|(i, _)| i)
            .collect();
        let owner = top
            .iter()
            .find(|&&i| model.decls[i].name == stem)
            .or(top.first())
            .map(|&i| self.linked.fq[i].clone())
            .or_else(|| model.package.as_ref().map(|p| p.0.clone()));
        let Some(owner) = owner else {
            diags.push(Diagnostic {
                level: DiagnosticLevel::Warning,
                file: model.file.clone(),
                message: "imports ignored: file declares no package or type".to_string(),
            });
            return;
        };
        for imp in &model.imports {
            facts.push(UsageFact {
                element: owner.clone(),
                api_name: imp.name.clone(),
                usage_kind: UsageKind::Import,
                span: span(&model.file, imp.start, imp.end),
            });
        }
    }

    fn project_package_type(&self, pkg: &str, simple: &str) -> Option<&'a String> {
        self.project.package_types.get(pkg)?.get(simple)
    }

    /// Resolves a simple type name through the import table.
    fn resolve_simple_type(&mut self, seg: &Seg) -> Option<String> {
        let name = seg.name.as_str();
        if let Some(qn) = self.single.get(name) {
            return Some(qn.clone());
        }
        if let Some(fq) = self.local_types.get(name) {
            return Some(fq.clone());
        }
        if let Some(fq) = self.project_package_type(&self.package, name) {
            return Some(fq.clone());
        }
        if JAVA_LANG.contains(&name) || !is_type_like(name) {
            return None;
        }
        let definite: Vec<&String> = self
            .wildcards
            .iter()
            .filter_map(|w| self.project_package_type(w, name))
            .collect();
        if let Some(fq) = definite.first() {
            return Some((*fq).clone());
        }
        let external: Vec<&String> = self
            .wildcards
            .iter()
            .filter(|w| !self.project.package_types.contains_key(*w))
            .collect();
        match external.as_slice() {
            [] => None,
            [only] => Some(format!("{only}.{name}")),
            many => {
                if self.warned.insert(name.to_string()) {
                    let list = many
                        .iter()
                        .map(|w| format!("{w}.*"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    self.diags.push(Diagnostic {
                        level: DiagnosticLevel::Warning,
                        file: self.file().to_string(),
                        message: format!(
                            "{}:{}: ambiguous name {name} could come from {list}; no fact recorded",
                            seg.start.line, seg.start.col
                        ),
                    });
                }
                None
            }
        }
    }

    /// Innermost type enclosing `decl`, then outward.
    fn enclosing_types(&self, decl: usize) -> Vec<&'a str> {
        let decls = &self.linked.model.decls;
        let mut out = Vec::new();
        let mut cur = Some(decl);
        while let Some(i) = cur {
            if decls[i].kind.is_type() {
                out.push(self.linked.fq[i].as_str());
            }
            cur = decls[i].parent;
        }
        out
    }

    fn project_method(&self, type_fq: &str, method: &str) -> Option<&'a String> {
        self.project.types.get(type_fq)?.methods.get(method)
    }

    fn fact(&self, m: &Mention, api_name: String, kind: UsageKind, upto: usize) -> UsageFact {
        UsageFact {
            element: self.linked.fq[m.owner].clone(),
            api_name,
            usage_kind: kind,
            span: span(self.file(), m.segs[0].start, m.segs[upto].end),
        }
    }

    fn resolve(&mut self, m: &Mention) -> Option<UsageFact> {
        let segs = &m.segs;
        let last = segs.len() - 1;
        let head = segs[0].name.as_str();
        let rest = || {
            segs[1..]
                .iter()
                .map(|s| s.name.as_str())
                .collect::<Vec<_>>()
                .join(".")
        };

        if m.role != Role::Expr {
            let kind = match m.role {
                Role::Extends => UsageKind::Extend,
                Role::Implements => UsageKind::Implement,
                Role::Annotation => UsageKind::Annotation,
                Role::New => UsageKind::Instantiate,
                _ => UsageKind::Reference,
            };
            if head == "this" || head == "super" {
                return None;
            }
            let qn = match self.resolve_simple_type(&segs[0]) {
                Some(base) if last == 0 => base,
                Some(base) => format!("{base}.{}", rest()),
                None if last > 0 && starts_lowercase(head) => join(segs),
                None => return None,
            };
            return Some(self.fact(m, qn, kind, last));
        }

        // expression context
        if head == "this" {
            if last == 1 && m.call {
                let ty = *self.enclosing_types(m.owner).first()?;
                let method = self.project_method(ty, &segs[1].name)?.clone();
                return Some(self.fact(m, method, UsageKind::Call, 1));
            }
            return None;
        }
        if head == "super" {
            return None;
        }
        if last == 0 && m.call {
            if let Some(qn) = self.static_members.get(head) {
                return Some(self.fact(m, qn.clone(), UsageKind::Call, 0));
            }
            for ty in self.enclosing_types(m.owner) {
                if let Some(method) = self.project_method(ty, head) {
                    return Some(self.fact(m, method.clone(), UsageKind::Call, 0));
                }
            }
            return None;
        }
        if let Some(qn) = self.static_members.get(head) {
            return Some(self.fact(m, qn.clone(), UsageKind::Reference, 0));
        }
        if let Some(ty) = self.resolve_simple_type(&segs[0]) {
            if last == 1 && m.call {
                if let Some(method) = self.project_method(&ty, &segs[1].name) {
                    return Some(self.fact(m, method.clone(), UsageKind::Call, 1));
                }
            }
            return Some(self.fact(m, ty, UsageKind::Reference, 0));
        }
        // fully qualified inline: at least two lower-case package segments,
        // then a type segment
        if starts_lowercase(head) && last >= 2 {
            let k = segs
                .iter()
                .position(|s| s.name.chars().next().is_some_and(char::is_uppercase))?;
            if k >= 2 && segs[..k].iter().all(|s| starts_lowercase(&s.name)) {
                let qn = join(&segs[..=k]);
                return Some(self.fact(m, qn, UsageKind::Reference, k));
            }
        }
        None
    }
}
