//! Tokenizer reproducing CPython 3.8's `tokenizer.c` behaviour, including
//! which errors it raises and where.

use super::error::{ErrorClass, RawError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tok {
    Name,
    Number,
    String,
    Newline,
    Indent,
    Dedent,
    EndMarker,
    /// Tokenizer failure; the lexer stops here.
    Error,

    // Keywords
    False,
    None,
    True,
    And,
    As,
    Assert,
    Async,
    Await,
    Break,
    Class,
    Continue,
    Def,
    Del,
    Elif,
    Else,
    Except,
    Finally,
    For,
    From,
    Global,
    If,
    Import,
    In,
    Is,
    Lambda,
    Nonlocal,
    Not,
    Or,
    Pass,
    Raise,
    Return,
    Try,
    While,
    With,
    Yield,

    // Operators and delimiters
    LPar,
    RPar,
    LSqb,
    RSqb,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    VBar,
    Amper,
    Less,
    Greater,
    Equal,
    Dot,
    Percent,
    Tilde,
    Circumflex,
    At,
    EqEqual,
    NotEqual,
    LessEqual,
    GreaterEqual,
    LeftShift,
    RightShift,
    DoubleStar,
    DoubleSlash,
    PlusEqual,
    MinEqual,
    StarEqual,
    SlashEqual,
    PercentEqual,
    AmperEqual,
    VBarEqual,
    CircumflexEqual,
    LeftShiftEqual,
    RightShiftEqual,
    DoubleStarEqual,
    DoubleSlashEqual,
    AtEqual,
    RArrow,
    Ellipsis,
    ColonEqual,
    /// Any other operator character (`!`, `$`, `?`, backtick, `<>`).
    Unknown,
}

impl Tok {
    pub fn keyword(text: &str) -> Option<Tok> {
        Some(match text {
            "False" => Tok::False,
            "None" => Tok::None,
            "True" => Tok::True,
            "and" => Tok::And,
            "as" => Tok::As,
            "assert" => Tok::Assert,
            "async" => Tok::Async,
            "await" => Tok::Await,
            "break" => Tok::Break,
            "class" => Tok::Class,
            "continue" => Tok::Continue,
            "def" => Tok::Def,
            "del" => Tok::Del,
            "elif" => Tok::Elif,
            "else" => Tok::Else,
            "except" => Tok::Except,
            "finally" => Tok::Finally,
            "for" => Tok::For,
            "from" => Tok::From,
            "global" => Tok::Global,
            "if" => Tok::If,
            "import" => Tok::Import,
            "in" => Tok::In,
            "is" => Tok::Is,
            "lambda" => Tok::Lambda,
            "nonlocal" => Tok::Nonlocal,
            "not" => Tok::Not,
            "or" => Tok::Or,
            "pass" => Tok::Pass,
            "raise" => Tok::Raise,
            "return" => Tok::Return,
            "try" => Tok::Try,
            "while" => Tok::While,
            "with" => Tok::With,
            "yield" => Tok::Yield,
            _ => return None,
        })
    }

    /// Augmented assignment operator tokens.
    pub fn is_augassign(self) -> bool {
        matches!(
            self,
            Tok::PlusEqual
                | Tok::MinEqual
                | Tok::StarEqual
                | Tok::SlashEqual
                | Tok::PercentEqual
                | Tok::AmperEqual
                | Tok::VBarEqual
                | Tok::CircumflexEqual
                | Tok::LeftShiftEqual
                | Tok::RightShiftEqual
                | Tok::DoubleStarEqual
                | Tok::DoubleSlashEqual
                | Tok::AtEqual
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: Tok,
    pub start: u32,
    pub end: u32,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    /// Emitted after the tokenizer reached end of input.
    pub at_eof: bool,
}

pub struct Tokenized {
    pub tokens: Vec<Token>,
    /// Set when the last token is `Tok::Error`.
    pub error: Option<RawError>,
    /// Line number the tokenizer reports for errors raised at end of input.
    pub eof_line: u32,
}

const TABSIZE: u32 = 8;
const MAXINDENT: usize = 100;
const MAXLEVEL: usize = 200;

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    line_start: usize,
    atbol: bool,
    indstack: Vec<u32>,
    altindstack: Vec<u32>,
    pendin: i32,
    parens: Vec<(u8, u32)>,
    tokens: Vec<Token>,
    /// Any token other than ENDMARKER has been produced.
    started: bool,
    eof_line: u32,
}

pub fn tokenize(src: &str) -> Tokenized {
    let mut lx = Lexer {
        src: src.as_bytes(),
        pos: 0,
        line: 1,
        line_start: 0,
        atbol: true,
        indstack: vec![0],
        altindstack: vec![0],
        pendin: 0,
        parens: Vec::new(),
        tokens: Vec::new(),
        started: false,
        eof_line: count_eof_line(src),
    };
    let error = lx.run().err();
    let eof_line = lx.eof_line;
    Tokenized {
        tokens: lx.tokens,
        error,
        eof_line,
    }
}

/// The line CPython reports at end of input: the number of lines once a
/// missing final line break is supplied.
fn count_eof_line(src: &str) -> u32 {
    let lines = super::nodes::LineIndex::new(src);
    let n = lines.line_count() as u32;
    let ends_with_break = src.ends_with('\n') || src.ends_with('\r');
    if src.is_empty() {
        1
    } else if ends_with_break {
        n - 1
    } else {
        n
    }
}

/// Number of characters in `b`, counting `\r\n` as one.
pub(crate) fn char_count(b: &[u8]) -> u32 {
    let chars = b.iter().filter(|&&c| c & 0xC0 != 0x80).count();
    let crlf = b.windows(2).filter(|w| w == b"\r\n").count();
    (chars - crlf) as u32
}

/// Source lines `first..=last` (1-based), line breaks included.
pub(crate) fn line_span_text(src: &[u8], first: u32, last: u32) -> String {
    let mut line = 1u32;
    let mut i = 0usize;
    let mut begin = None;
    while i < src.len() {
        if line == first && begin.is_none() {
            begin = Some(i);
        }
        let nl = match src[i] {
            b'\n' => 1,
            b'\r' if src.get(i + 1) == Some(&b'\n') => 2,
            b'\r' => 1,
            _ => 0,
        };
        if nl > 0 {
            i += nl;
            if line == last {
                break;
            }
            line += 1;
        } else {
            i += 1;
        }
    }
    match begin {
        Some(b) => String::from_utf8_lossy(&src[b..i]).into_owned(),
        None => String::new(),
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_' || c >= 128
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c >= 128
}

/// Checks a scanned identifier the way `PyUnicode_IsIdentifier` would.
pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c == '_' || unicode_ident::is_xid_start(c) => {}
        _ => return false,
    }
    chars.all(unicode_ident::is_xid_continue)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    /// Length of a line break at `pos`, if any.
    fn newline_len(&self, pos: usize) -> usize {
        match self.src.get(pos) {
            Some(b'\n') => 1,
            Some(b'\r') => {
                if self.src.get(pos + 1) == Some(&b'\n') {
                    2
                } else {
                    1
                }
            }
            _ => 0,
        }
    }

    fn at_newline(&self) -> bool {
        self.newline_len(self.pos) > 0
    }

    fn consume_newline(&mut self) {
        let n = self.newline_len(self.pos);
        debug_assert!(n > 0);
        self.pos += n;
        self.line += 1;
        self.line_start = self.pos;
    }

    fn col(&self) -> u32 {
        (self.pos - self.line_start) as u32
    }

    /// Characters in `src[from..to]`, counting `\r\n` once.
    fn chars_between(&self, from: usize, to: usize) -> u32 {
        char_count(&self.src[from.min(to)..to])
    }

    /// End of the line content (before its break) that contains `pos`.
    fn line_content_end(&self, pos: usize) -> usize {
        let mut i = pos;
        while i < self.src.len() && self.src[i] != b'\n' && self.src[i] != b'\r' {
            i += 1;
        }
        i
    }

    /// Column for errors reported with the cursor at the end of the
    /// current line, measured from the start of line `from`.
    fn col_to_line_end(&self, from: usize) -> u32 {
        self.chars_between(from, self.line_content_end(self.pos))
    }

    fn push(&mut self, kind: Tok, start: usize, line: u32, col: u32, at_eof: bool) {
        if kind != Tok::EndMarker {
            self.started = true;
        }
        self.tokens.push(Token {
            kind,
            start: start as u32,
            end: self.pos as u32,
            line,
            col,
            end_line: self.line,
            at_eof,
        });
    }

    fn push_error(&mut self, start: usize, line: u32, col: u32, at_eof: bool) {
        self.tokens.push(Token {
            kind: Tok::Error,
            start: start as u32,
            end: self.pos.max(start) as u32,
            line,
            col,
            end_line: self.line,
            at_eof,
        });
    }

    #[allow(clippy::too_many_arguments)]
    fn error(
        &mut self,
        class: ErrorClass,
        msg: String,
        start: usize,
        tok_line: u32,
        tok_col: u32,
        err_line: u32,
        err_col: u32,
    ) -> RawError {
        let at_eof = self.pos >= self.src.len();
        self.push_error(start, tok_line, tok_col, at_eof);
        let text = line_span_text(self.src, tok_line.min(err_line), err_line);
        RawError::new(class, msg, err_line, err_col).with_text(text)
    }

    /// Error located just before the current cursor (`syntaxerror()` style).
    fn here(&mut self, msg: String, start: usize, tok_line: u32, tok_col: u32) -> RawError {
        let l = self.line;
        let c = self
            .chars_between(self.line_start, self.pos)
            .saturating_sub(1);
        self.error(ErrorClass::Syntax, msg, start, tok_line, tok_col, l, c)
    }

    fn indent_error(&mut self, class: ErrorClass, msg: &str) -> RawError {
        let l = self.line;
        let c = self.col_to_line_end(self.line_start);
        let tc = self.col();
        self.error(class, msg.to_string(), self.pos, l, tc, l, c)
    }

    fn run(&mut self) -> Result<(), RawError> {
        loop {
            let mut blankline = false;
            if self.atbol {
                self.atbol = false;
                self.indentation(&mut blankline)?;
            }

            let at_end = self.pos >= self.src.len();
            while self.pendin != 0 {
                let (l, c) = (self.line, self.col());
                let kind = if self.pendin < 0 {
                    self.pendin += 1;
                    Tok::Dedent
                } else {
                    self.pendin -= 1;
                    Tok::Indent
                };
                let (l, c) = if at_end { (self.eof_line, 0) } else { (l, c) };
                self.push(kind, self.pos, l, c, at_end);
            }

            // Scan one token, looping over line continuations.
            loop {
                while matches!(self.peek(), Some(b' ' | b'\t' | 0x0c)) {
                    self.pos += 1;
                }
                if self.peek() == Some(b'#') {
                    while let Some(c) = self.peek() {
                        if c == b'\n' || c == b'\r' {
                            break;
                        }
                        self.pos += 1;
                    }
                }

                let start = self.pos;
                let (line, col) = (self.line, self.col());
                let c = match self.peek() {
                    Some(c) => c,
                    None => {
                        if self.pos > self.line_start {
                            // Unterminated last line: behave as if it ended
                            // with a line break.
                            if !blankline && self.parens.is_empty() {
                                self.push(Tok::Newline, start, line, col, false);
                            }
                            self.line_start = self.pos;
                            self.atbol = true;
                            break;
                        }
                        self.finish_eof();
                        return Ok(());
                    }
                };

                if is_ident_start(c) {
                    self.scan_name_or_prefixed_string(start, line, col)?;
                    break;
                }

                if self.at_newline() {
                    self.consume_newline();
                    self.atbol = true;
                    if blankline || !self.parens.is_empty() {
                        break;
                    }
                    self.started = true;
                    self.tokens.push(Token {
                        kind: Tok::Newline,
                        start: start as u32,
                        end: self.pos as u32,
                        line,
                        col,
                        end_line: line,
                        at_eof: false,
                    });
                    break;
                }

                if c == b'.' {
                    if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                        self.pos += 1;
                        self.scan_fraction(start, line, col)?;
                    } else if self.peek_at(1) == Some(b'.') && self.peek_at(2) == Some(b'.') {
                        self.pos += 3;
                        self.push(Tok::Ellipsis, start, line, col, false);
                    } else {
                        self.pos += 1;
                        self.push(Tok::Dot, start, line, col, false);
                    }
                    break;
                }

                if c.is_ascii_digit() {
                    self.scan_number(start, line, col)?;
                    break;
                }

                if c == b'"' || c == b'\'' {
                    self.scan_string(start, line, col)?;
                    break;
                }

                if c == b'\\' {
                    self.pos += 1;
                    if !self.at_newline() {
                        let (l, cc) = (self.line, self.col_to_line_end(self.line_start));
                        return Err(self.error(
                            ErrorClass::Syntax,
                            "unexpected character after line continuation character".into(),
                            start,
                            line,
                            col,
                            l,
                            cc,
                        ));
                    }
                    let (cont_line, cont_col) = (self.line, self.col_to_line_end(self.line_start));
                    self.consume_newline();
                    if self.pos >= self.src.len() {
                        return Err(self.error(
                            ErrorClass::Syntax,
                            "unexpected EOF while parsing".into(),
                            start,
                            line,
                            col,
                            cont_line,
                            cont_col,
                        ));
                    }
                    continue;
                }

                self.scan_operator(start, line, col)?;
                break;
            }
        }
    }

    fn indentation(&mut self, blankline: &mut bool) -> Result<(), RawError> {
        let mut col = 0u32;
        let mut altcol = 0u32;
        loop {
            match self.peek() {
                Some(b' ') => {
                    col += 1;
                    altcol += 1;
                }
                Some(b'\t') => {
                    col = (col / TABSIZE + 1) * TABSIZE;
                    altcol += 1;
                }
                Some(0x0c) => {
                    col = 0;
                    altcol = 0;
                }
                _ => break,
            }
            self.pos += 1;
        }
        // Input gets an implied final line break, so trailing whitespace
        // forms a blank line.
        let trailing = self.peek().is_none() && self.pos > self.line_start;
        if self.peek() == Some(b'#') || self.at_newline() || trailing {
            *blankline = true;
        }
        if *blankline || !self.parens.is_empty() {
            return Ok(());
        }
        let top = *self.indstack.last().unwrap();
        let alttop = *self.altindstack.last().unwrap();
        const TABERR: &str = "inconsistent use of tabs and spaces in indentation";
        if col == top {
            if altcol != alttop {
                return Err(self.indent_error(ErrorClass::Tab, TABERR));
            }
        } else if col > top {
            if self.indstack.len() >= MAXINDENT {
                return Err(
                    self.indent_error(ErrorClass::Indentation, "too many levels of indentation")
                );
            }
            if altcol <= alttop {
                return Err(self.indent_error(ErrorClass::Tab, TABERR));
            }
            self.pendin += 1;
            self.indstack.push(col);
            self.altindstack.push(altcol);
        } else {
            while self.indstack.len() > 1 && col < *self.indstack.last().unwrap() {
                self.pendin -= 1;
                self.indstack.pop();
                self.altindstack.pop();
            }
            if col != *self.indstack.last().unwrap() {
                return Err(self.indent_error(
                    ErrorClass::Indentation,
                    "unindent does not match any outer indentation level",
                ));
            }
            if altcol != *self.altindstack.last().unwrap() {
                return Err(self.indent_error(ErrorClass::Tab, TABERR));
            }
        }
        Ok(())
    }

    fn finish_eof(&mut self) {
        let (l, c) = (self.eof_line, 0);
        if self.started {
            self.push(Tok::Newline, self.pos, l, c, true);
            self.started = false;
        }
        self.push(Tok::EndMarker, self.pos, l, c, true);
    }

    fn scan_name_or_prefixed_string(
        &mut self,
        start: usize,
        line: u32,
        col: u32,
    ) -> Result<(), RawError> {
        let (mut saw_b, mut saw_r, mut saw_u, mut saw_f) = (false, false, false, false);
        while let Some(ch) = self.peek() {
            let lc = ch.to_ascii_lowercase();
            if !(saw_b || saw_u || saw_f) && lc == b'b' {
                saw_b = true;
            } else if !(saw_b || saw_u || saw_r || saw_f) && lc == b'u' {
                saw_u = true;
            } else if !(saw_r || saw_u) && lc == b'r' {
                saw_r = true;
            } else if !(saw_f || saw_b || saw_u) && lc == b'f' {
                saw_f = true;
            } else {
                break;
            }
            self.pos += 1;
            if matches!(self.peek(), Some(b'"' | b'\'')) {
                return self.scan_string(start, line, col);
            }
        }
        let mut nonascii = false;
        while let Some(ch) = self.peek() {
            if !is_ident_char(ch) {
                break;
            }
            nonascii |= ch >= 128;
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("\u{0}");
        if nonascii && !is_valid_identifier(text) {
            let l = self.line;
            let c = self
                .chars_between(self.line_start, self.pos)
                .saturating_sub(1);
            return Err(self.error(
                ErrorClass::Syntax,
                "invalid character in identifier".into(),
                start,
                line,
                col,
                l,
                c,
            ));
        }
        let kind = Tok::keyword(text).unwrap_or(Tok::Name);
        self.push(kind, start, line, col, false);
        Ok(())
    }

    fn scan_string(&mut self, start: usize, line: u32, col: u32) -> Result<(), RawError> {
        let quote = self.peek().unwrap();
        self.pos += 1;
        let mut quote_size = 1;
        let mut end_quote_size = 0;
        if self.peek() == Some(quote) {
            self.pos += 1;
            if self.peek() == Some(quote) {
                self.pos += 1;
                quote_size = 3;
            } else {
                end_quote_size = 1;
            }
        }
        while end_quote_size != quote_size {
            match self.peek() {
                None => {
                    let (msg, l) = if quote_size == 3 {
                        (
                            "EOF while scanning triple-quoted string literal",
                            self.eof_line,
                        )
                    } else {
                        ("EOL while scanning string literal", self.line)
                    };
                    // The reported offset runs from the token's first line
                    // to the end of input.
                    let mut end = self.src.len();
                    if end > 0 && self.src[end - 1] == b'\n' {
                        end -= 1;
                    }
                    if end > 0 && self.src[end - 1] == b'\r' {
                        end -= 1;
                    }
                    let c = self.chars_between(start - col as usize, end.max(start - col as usize));
                    return Err(self.error(ErrorClass::Syntax, msg.into(), start, line, col, l, c));
                }
                Some(_) if self.at_newline() => {
                    if quote_size == 1 {
                        let l = self.line;
                        let c = self.col_to_line_end(start - col as usize);
                        return Err(self.error(
                            ErrorClass::Syntax,
                            "EOL while scanning string literal".into(),
                            start,
                            line,
                            col,
                            l,
                            c,
                        ));
                    }
                    self.consume_newline();
                    end_quote_size = 0;
                }
                Some(ch) if ch == quote => {
                    self.pos += 1;
                    end_quote_size += 1;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    end_quote_size = 0;
                    if self.at_newline() {
                        self.consume_newline();
                    } else if self.peek().is_some() {
                        self.pos += 1;
                    }
                }
                Some(_) => {
                    self.pos += 1;
                    end_quote_size = 0;
                }
            }
        }
        self.push(Tok::String, start, line, col, false);
        Ok(())
    }

    fn digit(&self) -> bool {
        self.peek().is_some_and(|c| c.is_ascii_digit())
    }

    /// `tok_decimal_tail`: digits with single underscores between them.
    fn decimal_tail(&mut self, start: usize, line: u32, col: u32) -> Result<(), RawError> {
        loop {
            while self.digit() {
                self.pos += 1;
            }
            if self.peek() != Some(b'_') {
                return Ok(());
            }
            self.pos += 1;
            if !self.digit() {
                return Err(self.here("invalid decimal literal".into(), start, line, col));
            }
        }
    }

    fn scan_number(&mut self, start: usize, line: u32, col: u32) -> Result<(), RawError> {
        if self.peek() == Some(b'0') {
            self.pos += 1;
            match self.peek().map(|c| c.to_ascii_lowercase()) {
                Some(b'x') => {
                    self.pos += 1;
                    loop {
                        if self.peek() == Some(b'_') {
                            self.pos += 1;
                        }
                        if !self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                            return Err(self.here(
                                "invalid hexadecimal literal".into(),
                                start,
                                line,
                                col,
                            ));
                        }
                        while self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                            self.pos += 1;
                        }
                        if self.peek() != Some(b'_') {
                            break;
                        }
                    }
                }
                Some(b'o') => return self.scan_radix(start, line, col, b'8', "octal"),
                Some(b'b') => return self.scan_radix(start, line, col, b'2', "binary"),
                _ => {
                    let mut nonzero = false;
                    loop {
                        if self.peek() == Some(b'_') {
                            self.pos += 1;
                            if !self.digit() {
                                return Err(self.here(
                                    "invalid decimal literal".into(),
                                    start,
                                    line,
                                    col,
                                ));
                            }
                        }
                        if self.peek() != Some(b'0') {
                            break;
                        }
                        self.pos += 1;
                    }
                    if self.digit() {
                        nonzero = true;
                        self.decimal_tail(start, line, col)?;
                    }
                    match self.peek() {
                        Some(b'.') => {
                            self.pos += 1;
                            return self.scan_fraction(start, line, col);
                        }
                        Some(b'e' | b'E') => return self.scan_exponent(start, line, col),
                        Some(b'j' | b'J') => self.pos += 1,
                        _ if nonzero => {
                            return Err(self.here(
                                "leading zeros in decimal integer literals are not permitted; \
                                 use an 0o prefix for octal integers"
                                    .into(),
                                start,
                                line,
                                col,
                            ));
                        }
                        _ => {}
                    }
                }
            }
        } else {
            self.decimal_tail(start, line, col)?;
            match self.peek() {
                Some(b'.') => {
                    self.pos += 1;
                    return self.scan_fraction(start, line, col);
                }
                Some(b'e' | b'E') => return self.scan_exponent(start, line, col),
                Some(b'j' | b'J') => self.pos += 1,
                _ => {}
            }
        }
        self.push(Tok::Number, start, line, col, false);
        Ok(())
    }

    fn scan_radix(
        &mut self,
        start: usize,
        line: u32,
        col: u32,
        limit: u8,
        name: &str,
    ) -> Result<(), RawError> {
        self.pos += 1;
        loop {
            if self.peek() == Some(b'_') {
                self.pos += 1;
            }
            let c = self.peek();
            if !c.is_some_and(|c| (b'0'..limit).contains(&c)) {
                return Err(match c {
                    Some(d) if d.is_ascii_digit() => self.here(
                        format!("invalid digit '{}' in {} literal", d as char, name),
                        start,
                        line,
                        col,
                    ),
                    _ => self.here(format!("invalid {} literal", name), start, line, col),
                });
            }
            while self.peek().is_some_and(|c| (b'0'..limit).contains(&c)) {
                self.pos += 1;
            }
            if self.peek() != Some(b'_') {
                break;
            }
        }
        if let Some(d) = self.peek().filter(|c| c.is_ascii_digit()) {
            self.pos += 1;
            return Err(self.here(
                format!("invalid digit '{}' in {} literal", d as char, name),
                start,
                line,
                col,
            ));
        }
        self.push(Tok::Number, start, line, col, false);
        Ok(())
    }

    /// Called just after the `.` of a float literal.
    fn scan_fraction(&mut self, start: usize, line: u32, col: u32) -> Result<(), RawError> {
        if self.digit() {
            self.decimal_tail(start, line, col)?;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            return self.scan_exponent(start, line, col);
        }
        if matches!(self.peek(), Some(b'j' | b'J')) {
            self.pos += 1;
        }
        self.push(Tok::Number, start, line, col, false);
        Ok(())
    }

    /// Called at the `e`/`E` of an exponent.
    fn scan_exponent(&mut self, start: usize, line: u32, col: u32) -> Result<(), RawError> {
        let e_pos = self.pos;
        self.pos += 1;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
            if !self.digit() {
                return Err(self.here("invalid decimal literal".into(), start, line, col));
            }
        } else if !self.digit() {
            // Not an exponent after all: `1e` is NUMBER `1` then NAME `e`.
            self.pos = e_pos;
            self.push(Tok::Number, start, line, col, false);
            return Ok(());
        }
        self.decimal_tail(start, line, col)?;
        if matches!(self.peek(), Some(b'j' | b'J')) {
            self.pos += 1;
        }
        self.push(Tok::Number, start, line, col, false);
        Ok(())
    }

    fn scan_operator(&mut self, start: usize, line: u32, col: u32) -> Result<(), RawError> {
        let c1 = self.peek().unwrap();
        let c2 = self.peek_at(1).unwrap_or(0);
        let c3 = self.peek_at(2).unwrap_or(0);
        let three = match (c1, c2, c3) {
            (b'*', b'*', b'=') => Some(Tok::DoubleStarEqual),
            (b'/', b'/', b'=') => Some(Tok::DoubleSlashEqual),
            (b'<', b'<', b'=') => Some(Tok::LeftShiftEqual),
            (b'>', b'>', b'=') => Some(Tok::RightShiftEqual),
            _ => None,
        };
        if let Some(kind) = three {
            self.pos += 3;
            self.push(kind, start, line, col, false);
            return Ok(());
        }
        let two = match (c1, c2) {
            (b'!', b'=') => Some(Tok::NotEqual),
            (b'%', b'=') => Some(Tok::PercentEqual),
            (b'&', b'=') => Some(Tok::AmperEqual),
            (b'*', b'*') => Some(Tok::DoubleStar),
            (b'*', b'=') => Some(Tok::StarEqual),
            (b'+', b'=') => Some(Tok::PlusEqual),
            (b'-', b'=') => Some(Tok::MinEqual),
            (b'-', b'>') => Some(Tok::RArrow),
            (b'/', b'/') => Some(Tok::DoubleSlash),
            (b'/', b'=') => Some(Tok::SlashEqual),
            (b':', b'=') => Some(Tok::ColonEqual),
            (b'<', b'<') => Some(Tok::LeftShift),
            (b'<', b'=') => Some(Tok::LessEqual),
            // Only valid under `barry_as_FLUFL`; the parser rejects it.
            (b'<', b'>') => Some(Tok::Unknown),
            (b'=', b'=') => Some(Tok::EqEqual),
            (b'>', b'=') => Some(Tok::GreaterEqual),
            (b'>', b'>') => Some(Tok::RightShift),
            (b'@', b'=') => Some(Tok::AtEqual),
            (b'^', b'=') => Some(Tok::CircumflexEqual),
            (b'|', b'=') => Some(Tok::VBarEqual),
            _ => None,
        };
        if let Some(kind) = two {
            self.pos += 2;
            self.push(kind, start, line, col, false);
            return Ok(());
        }
        let kind = match c1 {
            b'(' => Tok::LPar,
            b')' => Tok::RPar,
            b'[' => Tok::LSqb,
            b']' => Tok::RSqb,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b':' => Tok::Colon,
            b',' => Tok::Comma,
            b';' => Tok::Semi,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'|' => Tok::VBar,
            b'&' => Tok::Amper,
            b'<' => Tok::Less,
            b'>' => Tok::Greater,
            b'=' => Tok::Equal,
            b'%' => Tok::Percent,
            b'~' => Tok::Tilde,
            b'^' => Tok::Circumflex,
            b'@' => Tok::At,
            _ => Tok::Unknown,
        };
        self.pos += 1;
        match c1 {
            b'(' | b'[' | b'{' => {
                if self.parens.len() >= MAXLEVEL {
                    return Err(self.here("too many nested parentheses".into(), start, line, col));
                }
                self.parens.push((c1, line));
            }
            b')' | b']' | b'}' => match self.parens.pop() {
                None => {
                    return Err(self.here(format!("unmatched '{}'", c1 as char), start, line, col));
                }
                Some((open, open_line)) => {
                    let ok = matches!((open, c1), (b'(', b')') | (b'[', b']') | (b'{', b'}'));
                    if !ok {
                        let msg = if open_line != self.line {
                            format!(
                                "closing parenthesis '{}' does not match opening parenthesis '{}' on line {}",
                                c1 as char, open as char, open_line
                            )
                        } else {
                            format!(
                                "closing parenthesis '{}' does not match opening parenthesis '{}'",
                                c1 as char, open as char
                            )
                        };
                        return Err(self.here(msg, start, line, col));
                    }
                }
            },
            _ => {}
        }
        self.push(kind, start, line, col, false);
        Ok(())
    }
}
