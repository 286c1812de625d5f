//! Recursive-descent checker for the Graphviz DOT language.
//!
//! graph     : [strict] (graph | digraph) [ID] '{' stmt_list '}'
//! stmt_list : [stmt [';'] stmt_list]
//! stmt      : node_stmt | edge_stmt | attr_stmt | ID '=' ID | subgraph
//! attr_stmt : (graph | node | edge) attr_list
//! attr_list : '[' [a_list] ']' [attr_list]
//! a_list    : ID '=' ID [';' | ','] [a_list]
//! edge_stmt : (node_id | subgraph) edgeRHS [attr_list]
//! edgeRHS   : edgeop (node_id | subgraph) [edgeRHS]
//! node_stmt : node_id [attr_list]
//! node_id   : ID [port]
//! port      : ':' ID [':' compass_pt] | ':' compass_pt
//! subgraph  : [subgraph [ID]] '{' stmt_list '}'
//!
//! HTML strings must also be balanced markup with valid entities.

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Id(String),
    Html(String),
    Quoted(String),
    Punct(&'static str),
}

fn tokenize(input: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') || c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                i += 1;
            }
            if i + 1 >= chars.len() {
                return Err("unterminated comment".into());
            }
            i += 2;
        } else if c == '-' && matches!(chars.get(i + 1), Some('>') | Some('-')) {
            tokens.push(Token::Punct(if chars[i + 1] == '>' { "->" } else { "--" }));
            i += 2;
        } else if "{}[];,=:".contains(c) {
            let p = match c {
                '{' => "{",
                '}' => "}",
                '[' => "[",
                ']' => "]",
                ';' => ";",
                ',' => ",",
                '=' => "=",
                _ => ":",
            };
            tokens.push(Token::Punct(p));
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if i + 1 < chars.len() => {
                        s.push('\\');
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            tokens.push(Token::Quoted(s));
        } else if c == '<' {
            let mut depth = 0;
            let start = i;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated HTML string".into()),
                    Some('<') => depth += 1,
                    Some('>') => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            let body: String = chars[start + 1..i].iter().collect();
            i += 1;
            check_markup(&body)?;
            tokens.push(Token::Html(body));
        } else if c.is_alphabetic() || c == '_' || !c.is_ascii() {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || !chars[i].is_ascii())
            {
                i += 1;
            }
            tokens.push(Token::Id(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() || c == '.' || c == '-' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let numeral: String = chars[start..i].iter().collect();
            let body = numeral.trim_start_matches('-');
            if body.is_empty() || body.matches('.').count() > 1 || body == "." {
                return Err(format!("bad numeral `{numeral}`"));
            }
            if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
                return Err(format!("identifier may not start with a digit near `{numeral}`"));
            }
            tokens.push(Token::Id(numeral));
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(tokens)
}

/// Balanced tags, quoted attribute values and well-formed entities.
fn check_markup(body: &str) -> Result<(), String> {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = body;
    while let Some(pos) = rest.find(['<', '&']) {
        let text = &rest[..pos];
        if text.contains('>') {
            return Err("stray `>` in HTML label".into());
        }
        rest = &rest[pos..];
        if rest.starts_with('&') {
            let end = rest.find(';').ok_or("unterminated entity")?;
            let entity = &rest[1..end];
            let ok = matches!(entity, "amp" | "lt" | "gt" | "quot" | "apos")
                || entity.strip_prefix('#').is_some_and(|n| {
                    n.parse::<u32>().is_ok()
                        || n.strip_prefix('x').is_some_and(|h| u32::from_str_radix(h, 16).is_ok())
                });
            if !ok {
                return Err(format!("bad entity `&{entity};`"));
            }
            rest = &rest[end + 1..];
            continue;
        }
        let end = rest.find('>').ok_or("unterminated tag")?;
        let tag = &rest[1..end];
        rest = &rest[end + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            match stack.pop() {
                Some(open) if open.eq_ignore_ascii_case(name.trim()) => {}
                other => return Err(format!("`</{name}>` closes {other:?}")),
            }
            continue;
        }
        let self_closing = tag.ends_with('/');
        let tag = tag.trim_end_matches('/');
        let name = tag.split_whitespace().next().ok_or("empty tag")?;
        if !name.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(format!("bad tag name `{name}`"));
        }
        if tag.matches('"').count() % 2 != 0 {
            return Err(format!("unbalanced quotes in `<{tag}>`"));
        }
        if !self_closing {
            stack.push(name.to_owned());
        }
    }
    if rest.contains('>') {
        return Err("stray `>` in HTML label".into());
    }
    if let Some(open) = stack.pop() {
        return Err(format!("unclosed `<{open}>`"));
    }
    Ok(())
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    directed: bool,
}

fn is_keyword(id: &str, keyword: &str) -> bool {
    id.eq_ignore_ascii_case(keyword)
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token::Punct(q)) if *q == p)
    }

    fn peek_keyword(&self, keyword: &str) -> bool {
        matches!(self.peek(), Some(Token::Id(id)) if is_keyword(id, keyword))
    }

    fn expect(&mut self, p: &str) -> Result<(), String> {
        if self.peek_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected `{p}` at token {}, found {:?}", self.pos, self.peek()))
        }
    }

    fn peek_id(&self) -> bool {
        match self.peek() {
            Some(Token::Id(id)) => !["node", "edge", "graph", "digraph", "subgraph", "strict"]
                .iter()
                .any(|k| is_keyword(id, k)),
            Some(Token::Quoted(_)) | Some(Token::Html(_)) => true,
            _ => false,
        }
    }

    fn id(&mut self) -> Result<(), String> {
        if self.peek_id() {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected ID at token {}, found {:?}", self.pos, self.peek()))
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        if self.peek_keyword("strict") {
            self.pos += 1;
        }
        if self.peek_keyword("digraph") {
            self.directed = true;
        } else if !self.peek_keyword("graph") {
            return Err("expected `graph` or `digraph`".into());
        }
        self.pos += 1;
        if self.peek_id() {
            self.pos += 1;
        }
        self.expect("{")?;
        self.stmt_list()?;
        self.expect("}")?;
        if self.pos != self.tokens.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !self.peek_punct("}") {
            if self.peek().is_none() {
                return Err("unexpected end of input".into());
            }
            self.stmt()?;
            if self.peek_punct(";") {
                self.pos += 1;
            }
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), String> {
        if ["graph", "node", "edge"].iter().any(|k| self.peek_keyword(k)) {
            self.pos += 1;
            return self.attr_list(true);
        }
        if self.peek_id() && matches!(self.tokens.get(self.pos + 1), Some(Token::Punct("="))) {
            self.pos += 2;
            return self.id();
        }
        if self.peek_keyword("subgraph") || self.peek_punct("{") {
            self.subgraph()?;
        } else {
            self.node_id()?;
        }
        while self.peek_punct("->") || self.peek_punct("--") {
            let op = if self.peek_punct("->") { "->" } else { "--" };
            if (op == "->") != self.directed {
                return Err(format!("edge operator `{op}` in wrong graph kind"));
            }
            self.pos += 1;
            if self.peek_keyword("subgraph") || self.peek_punct("{") {
                self.subgraph()?;
            } else {
                self.node_id()?;
            }
        }
        self.attr_list(false)
    }

    fn subgraph(&mut self) -> Result<(), String> {
        if self.peek_keyword("subgraph") {
            self.pos += 1;
            if self.peek_id() {
                self.pos += 1;
            }
        }
        self.expect("{")?;
        self.stmt_list()?;
        self.expect("}")
    }

    fn node_id(&mut self) -> Result<(), String> {
        self.id()?;
        if self.peek_punct(":") {
            self.pos += 1;
            self.id()?;
            if self.peek_punct(":") {
                self.pos += 1;
                self.id()?;
            }
        }
        Ok(())
    }

    fn attr_list(&mut self, required: bool) -> Result<(), String> {
        if required && !self.peek_punct("[") {
            return Err("attribute statement needs `[`".into());
        }
        while self.peek_punct("[") {
            self.pos += 1;
            while !self.peek_punct("]") {
                self.id()?;
                self.expect("=")?;
                self.id()?;
                if self.peek_punct(";") || self.peek_punct(",") {
                    self.pos += 1;
                }
            }
            self.pos += 1;
        }
        Ok(())
    }
}

/// `Ok` when `input` is a syntactically valid DOT graph.
pub fn validate(input: &str) -> Result<(), String> {
    let mut parser = Parser {
        tokens: tokenize(input)?,
        pos: 0,
        directed: false,
    };
    parser.graph()
}

