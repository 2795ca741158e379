//! Pragmatic C/C++ lexer and truncation classifier.
//!
//! The lexer is total: any text produces a token stream. It gets literal and
//! comment boundaries right (a `}` inside `"..."` is not a brace) but makes no
//! attempt at preprocessing or parsing. Each preprocessor directive becomes a
//! single token so that macro bodies cannot disturb brace balance.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    Operator,
    Punctuation,
    Preprocessor,
}

impl TokenKind {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::NumberLiteral | TokenKind::StringLiteral | TokenKind::CharLiteral
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the token's first character.
    pub line: u32,
}

impl Token {
    pub fn is_punct(&self, text: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.text == text
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.kind == TokenKind::Operator && self.text == text
    }
}

/// Construct the raw text ended inside, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndedInside {
    No,
    BlockComment,
    StringLiteral,
    CharLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub ended_inside: EndedInside,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

const KEYWORDS: &[&str] = &[
    // C
    "auto",
    "break",
    "case",
    "char",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extern",
    "float",
    "for",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "register",
    "restrict",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "typedef",
    "union",
    "unsigned",
    "void",
    "volatile",
    "while",
    "_Alignas",
    "_Alignof",
    "_Atomic",
    "_Bool",
    "_Complex",
    "_Generic",
    "_Imaginary",
    "_Noreturn",
    "_Static_assert",
    "_Thread_local",
    // C++
    "alignas",
    "alignof",
    "asm",
    "bool",
    "catch",
    "char8_t",
    "char16_t",
    "char32_t",
    "class",
    "co_await",
    "co_return",
    "co_yield",
    "concept",
    "const_cast",
    "consteval",
    "constexpr",
    "constinit",
    "decltype",
    "delete",
    "dynamic_cast",
    "explicit",
    "export",
    "false",
    "friend",
    "mutable",
    "namespace",
    "new",
    "noexcept",
    "nullptr",
    "operator",
    "private",
    "protected",
    "public",
    "reinterpret_cast",
    "requires",
    "static_assert",
    "static_cast",
    "template",
    "this",
    "thread_local",
    "throw",
    "true",
    "try",
    "typeid",
    "typename",
    "using",
    "virtual",
    "wchar_t",
];

/// Keywords that can appear in a declaration's return type or specifiers.
const TYPE_KEYWORDS: &[&str] = &[
    "auto",
    "char",
    "const",
    "double",
    "enum",
    "extern",
    "float",
    "inline",
    "int",
    "long",
    "register",
    "restrict",
    "short",
    "signed",
    "static",
    "struct",
    "union",
    "unsigned",
    "void",
    "volatile",
    "_Atomic",
    "_Bool",
    "_Complex",
    "_Imaginary",
    "_Noreturn",
    "_Thread_local",
    "bool",
    "char8_t",
    "char16_t",
    "char32_t",
    "class",
    "consteval",
    "constexpr",
    "constinit",
    "decltype",
    "explicit",
    "friend",
    "mutable",
    "thread_local",
    "typename",
    "virtual",
    "wchar_t",
];

const STRING_PREFIXES: &[&str] = &["L", "u", "U", "u8", "R", "LR", "uR", "UR", "u8R"];
const CHAR_PREFIXES: &[&str] = &["L", "u", "U", "u8"];

const OPERATORS_3: &[&str] = &["<<=", ">>=", "<=>", "...", "->*"];
const OPERATORS_2: &[&str] = &[
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "::", ".*", "##",
];

pub fn is_keyword(text: &str) -> bool {
    KEYWORDS.contains(&text)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$' || (!c.is_ascii() && c.is_alphabetic())
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$' || (!c.is_ascii() && c.is_alphanumeric())
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    at_line_start: bool,
    tokens: Vec<Token>,
    ended_inside: EndedInside,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32) {
        let text = &self.src[start..self.pos];
        if !text.is_empty() {
            self.tokens.push(Token {
                kind,
                text: text.to_owned(),
                line,
            });
        }
    }

    fn run(mut self) -> TokenStream {
        while let Some(c) = self.peek() {
            if c == '\n' {
                self.bump();
                self.at_line_start = true;
                continue;
            }
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '\\' && matches!(self.peek_at(1), Some('\n')) {
                self.bump();
                self.bump();
                continue;
            }
            if c == '\\' && self.rest().starts_with("\\\r\n") {
                self.pos += 3;
                self.line += 1;
                continue;
            }
            if self.rest().starts_with("//") {
                self.skip_line_comment();
                continue;
            }
            if self.rest().starts_with("/*") {
                if !self.skip_block_comment() {
                    self.ended_inside = EndedInside::BlockComment;
                    break;
                }
                continue;
            }
            if c == '#' && self.at_line_start {
                self.lex_directive();
                continue;
            }
            self.at_line_start = false;
            let start = self.pos;
            let line = self.line;
            if is_ident_start(c) {
                self.lex_word(start, line);
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
            {
                self.lex_number(start, line);
            } else if c == '"' {
                self.bump();
                self.lex_quoted('"', start, line);
            } else if c == '\'' {
                self.bump();
                self.lex_quoted('\'', start, line);
            } else if matches!(c, '(' | ')' | '{' | '}' | '[' | ']' | ';' | ',') {
                self.bump();
                self.push(TokenKind::Punctuation, start, line);
            } else {
                self.lex_operator(start, line);
            }
            if self.ended_inside != EndedInside::No {
                break;
            }
        }
        TokenStream {
            tokens: self.tokens,
            ended_inside: self.ended_inside,
        }
    }

    fn skip_line_comment(&mut self) {
        match self.rest().find('\n') {
            Some(off) => self.pos += off,
            None => self.pos = self.src.len(),
        }
    }

    /// Returns false when the comment is unterminated.
    fn skip_block_comment(&mut self) -> bool {
        let body = &self.rest()[2..];
        match body.find("*/") {
            Some(end) => {
                self.line += body[..end].matches('\n').count() as u32;
                self.pos += 2 + end + 2;
                true
            }
            None => {
                self.line += body.matches('\n').count() as u32;
                self.pos = self.src.len();
                false
            }
        }
    }

    /// One token per directive: comments dropped, line continuations
    /// joined, whitespace runs collapsed (outside literals).
    fn lex_directive(&mut self) {
        let line = self.line;
        let mut text = String::new();
        let mut pending_space = false;
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            if c == '\\' && (self.rest().starts_with("\\\n") || self.rest().starts_with("\\\r\n")) {
                self.bump();
                if self.peek() == Some('\r') {
                    self.bump();
                }
                self.bump();
                pending_space = true;
                continue;
            }
            if self.rest().starts_with("//") {
                self.skip_line_comment();
                break;
            }
            if self.rest().starts_with("/*") {
                if !self.skip_block_comment() {
                    self.ended_inside = EndedInside::BlockComment;
                    break;
                }
                pending_space = true;
                continue;
            }
            if c.is_whitespace() {
                self.bump();
                pending_space = true;
                continue;
            }
            if pending_space && !text.is_empty() {
                text.push(' ');
            }
            pending_space = false;
            if c == '"' || c == '\'' {
                let start = self.pos;
                self.bump();
                self.scan_quoted_body(c);
                text.push_str(&self.src[start..self.pos]);
                if self.ended_inside != EndedInside::No {
                    break;
                }
                continue;
            }
            text.push(c);
            self.bump();
        }
        self.tokens.push(Token {
            kind: TokenKind::Preprocessor,
            text,
            line,
        });
        self.at_line_start = false;
    }

    fn lex_word(&mut self, start: usize, line: u32) {
        while self.peek().is_some_and(is_ident_continue) {
            self.bump();
        }
        let word = &self.src[start..self.pos];
        match self.peek() {
            Some('"') if STRING_PREFIXES.contains(&word) => {
                self.bump();
                if word.ends_with('R') && self.try_raw_string(start, line) {
                    return;
                }
                self.lex_quoted('"', start, line);
            }
            Some('\'') if CHAR_PREFIXES.contains(&word) => {
                self.bump();
                self.lex_quoted('\'', start, line);
            }
            _ => {
                let kind = if is_keyword(word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                };
                self.push(kind, start, line);
            }
        }
    }

    /// Cursor sits just past `R"`. Falls back (returns false, cursor
    /// unchanged) when no valid delimiter follows.
    fn try_raw_string(&mut self, start: usize, line: u32) -> bool {
        let rest = self.rest();
        let Some(open) = rest.find('(') else {
            return false;
        };
        let delim = &rest[..open];
        if delim.len() > 16
            || delim
                .chars()
                .any(|c| c.is_whitespace() || matches!(c, ')' | '\\' | '"'))
        {
            return false;
        }
        let closing = format!("){delim}\"");
        let body_start = self.pos + open + 1;
        match self.src[body_start..].find(&closing) {
            Some(end) => {
                let stop = body_start + end + closing.len();
                self.line += self.src[self.pos..stop].matches('\n').count() as u32;
                self.pos = stop;
            }
            None => {
                self.line += self.rest().matches('\n').count() as u32;
                self.pos = self.src.len();
                self.ended_inside = EndedInside::StringLiteral;
            }
        }
        self.push(TokenKind::StringLiteral, start, line);
        true
    }

    /// Consumes up to and including the closing quote. An unescaped newline
    /// ends the literal without consuming it.
    fn scan_quoted_body(&mut self, quote: char) {
        loop {
            match self.peek() {
                None => {
                    self.ended_inside = if quote == '"' {
                        EndedInside::StringLiteral
                    } else {
                        EndedInside::CharLiteral
                    };
                    return;
                }
                Some('\n') => return,
                Some('\\') => {
                    self.bump();
                    if self.peek().is_some() {
                        self.bump();
                    }
                }
                Some(c) => {
                    self.bump();
                    if c == quote {
                        return;
                    }
                }
            }
        }
    }

    fn lex_quoted(&mut self, quote: char, start: usize, line: u32) {
        self.scan_quoted_body(quote);
        let kind = if quote == '"' {
            TokenKind::StringLiteral
        } else {
            TokenKind::CharLiteral
        };
        self.push(kind, start, line);
    }

    fn lex_number(&mut self, start: usize, line: u32) {
        let mut prev = '\0';
        while let Some(c) = self.peek() {
            let take = c.is_ascii_alphanumeric()
                || c == '_'
                || c == '.'
                || (c == '\'' && self.peek_at(1).is_some_and(|d| d.is_ascii_alphanumeric()))
                || (matches!(c, '+' | '-') && matches!(prev, 'e' | 'E' | 'p' | 'P'));
            if !take {
                break;
            }
            prev = c;
            self.bump();
        }
        self.push(TokenKind::NumberLiteral, start, line);
    }

    fn lex_operator(&mut self, start: usize, line: u32) {
        let rest = self.rest();
        let width = OPERATORS_3
            .iter()
            .chain(OPERATORS_2)
            .find(|op| rest.starts_with(**op))
            .map(|op| op.len())
            .unwrap_or_else(|| rest.chars().next().map_or(0, char::len_utf8));
        self.pos += width;
        self.push(TokenKind::Operator, start, line);
    }
}

/// Lexes C/C++ source. Never fails; unknown characters become one-character
/// operator tokens.
pub fn tokenize(code: &str) -> TokenStream {
    Lexer {
        src: code,
        pos: 0,
        line: 1,
        at_line_start: true,
        tokens: Vec::new(),
        ended_inside: EndedInside::No,
    }
    .run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletenessClass {
    Complete,
    TruncatedStart,
    TruncatedEnd,
    TruncatedBoth,
    Empty,
    DeclarationOnly,
}

impl CompletenessClass {
    pub const ALL: [CompletenessClass; 6] = [
        CompletenessClass::Complete,
        CompletenessClass::TruncatedStart,
        CompletenessClass::TruncatedEnd,
        CompletenessClass::TruncatedBoth,
        CompletenessClass::Empty,
        CompletenessClass::DeclarationOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompletenessClass::Complete => "complete",
            CompletenessClass::TruncatedStart => "truncated_start",
            CompletenessClass::TruncatedEnd => "truncated_end",
            CompletenessClass::TruncatedBoth => "truncated_both",
            CompletenessClass::Empty => "empty",
            CompletenessClass::DeclarationOnly => "declaration_only",
        }
    }
}

impl fmt::Display for CompletenessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// Identifiers that introduce a parenthesised attribute, not a function name.
const ATTRIBUTE_WORDS: &[&str] = &[
    "__attribute__",
    "__attribute",
    "__declspec",
    "alignas",
    "_Alignas",
];

fn is_statement_token(t: &Token) -> bool {
    match t.kind {
        TokenKind::Punctuation => matches!(t.text.as_str(), ";" | "{" | "}"),
        TokenKind::Operator => matches!(
            t.text.as_str(),
            "=" | "+="
                | "-="
                | "*="
                | "/="
                | "%="
                | "&="
                | "|="
                | "^="
                | "<<="
                | ">>="
                | "."
                | "->"
                | "?"
        ),
        TokenKind::Keyword => matches!(
            t.text.as_str(),
            "return"
                | "if"
                | "else"
                | "while"
                | "for"
                | "do"
                | "switch"
                | "case"
                | "goto"
                | "break"
                | "continue"
                | "sizeof"
                | "new"
                | "delete"
                | "throw"
        ),
        TokenKind::NumberLiteral | TokenKind::StringLiteral | TokenKind::CharLiteral => true,
        TokenKind::Identifier | TokenKind::Preprocessor => false,
    }
}

fn is_type_forming(t: &Token) -> bool {
    match t.kind {
        TokenKind::Identifier => true,
        TokenKind::Keyword => TYPE_KEYWORDS.contains(&t.text.as_str()),
        TokenKind::Operator => matches!(t.text.as_str(), "*" | "&" | "&&"),
        _ => false,
    }
}

/// Index of the parenthesis opening the parameter list: the first `(`
/// that does not belong to an attribute specifier.
fn parameter_paren(code: &[&Token]) -> Option<usize> {
    let mut i = 0;
    while i < code.len() {
        let t = code[i];
        if t.is_punct("(") {
            let owner = i.checked_sub(1).map(|j| code[j]);
            let is_attribute = owner.is_some_and(|o| ATTRIBUTE_WORDS.contains(&o.text.as_str()));
            if !is_attribute {
                return Some(i);
            }
            let mut depth = 0usize;
            while i < code.len() {
                if code[i].is_punct("(") {
                    depth += 1;
                } else if code[i].is_punct(")") {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                i += 1;
            }
        }
        i += 1;
    }
    None
}

fn start_truncated(code: &[&Token]) -> bool {
    let mut balance = 0i64;
    for t in code {
        if t.is_punct("{") {
            balance += 1;
        } else if t.is_punct("}") {
            balance -= 1;
            if balance < 0 {
                return true;
            }
        }
    }

    let Some(paren) = parameter_paren(code) else {
        return true;
    };
    let prefix = &code[..paren];
    let Some(name) = prefix.last() else {
        return true;
    };
    if prefix.iter().any(|t| is_statement_token(t)) {
        return true;
    }
    // operators, conversion functions and destructors
    if prefix
        .iter()
        .any(|t| (t.kind == TokenKind::Keyword && t.text == "operator") || t.is_op("~"))
    {
        return false;
    }
    if name.kind != TokenKind::Identifier {
        return true;
    }
    // walk back over a qualified name `A::B::name`
    let mut head = prefix.len() - 1;
    while head >= 2
        && prefix[head - 1].is_op("::")
        && prefix[head - 2].kind == TokenKind::Identifier
    {
        head -= 2;
    }
    let qualified = head < prefix.len() - 1 || (head >= 1 && prefix[head - 1].is_op("::"));
    let before = &prefix[..head];
    if before.iter().any(|t| is_type_forming(t)) {
        return false;
    }
    // constructors defined out of line: `Foo::Foo(`
    !qualified
}

fn end_truncated(stream: &TokenStream, code: &[&Token]) -> bool {
    if stream.ended_inside != EndedInside::No {
        return true;
    }
    let balance: i64 = code
        .iter()
        .map(|t| {
            if t.is_punct("{") {
                1
            } else if t.is_punct("}") {
                -1
            } else {
                0
            }
        })
        .sum();
    if balance > 0 {
        return true;
    }
    !code
        .last()
        .is_some_and(|t| t.is_punct("}") || t.is_punct(";"))
}

/// Assigns exactly one completeness class to a lexed function.
///
/// Rules, in order:
/// 1. no code tokens: `Empty`;
/// 2. no `{` and the last token is `;`: `DeclarationOnly`;
/// 3. the header is missing its start when the text closes a brace it never
///    opened, has no parameter list, has nothing before the parameter list,
///    has statement tokens before it, or names the function with a lone
///    identifier that no return type precedes (constructors, destructors and
///    operators excepted);
/// 4. the end is missing when braces stay open, the text stops inside a
///    comment or literal, or the last token is neither `}` nor `;`.
///
/// Preprocessor tokens are ignored by every rule.
pub fn classify_completeness(stream: &TokenStream) -> CompletenessClass {
    let code: Vec<&Token> = stream
        .tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Preprocessor)
        .collect();
    if code.is_empty() {
        return CompletenessClass::Empty;
    }
    let has_body = code.iter().any(|t| t.is_punct("{"));
    if !has_body && code.last().is_some_and(|t| t.is_punct(";")) {
        return CompletenessClass::DeclarationOnly;
    }
    match (start_truncated(&code), end_truncated(stream, &code)) {
        (true, true) => CompletenessClass::TruncatedBoth,
        (true, false) => CompletenessClass::TruncatedStart,
        (false, true) => CompletenessClass::TruncatedEnd,
        (false, false) => CompletenessClass::Complete,
    }
}
