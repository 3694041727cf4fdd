// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::text::FileId;
use proptest::prelude::*;

const F: FileId = FileId(7);

const THREE_FUNS: &str = "module 0x1::demo {
    fun one(a: u64): u64 { a + 1 }
    fun two(a: u64, b: u64): u64 { let c = a * b; c }
    fun three(flag: bool): u64 { if flag { 1 } else { one(2) } }
}
";

fn funs(out: &ParseOutcome) -> Vec<&ParsedItem> {
    out.module.as_ref().unwrap().items.iter().collect()
}

#[test]
fn clean_module_of_three_functions() {
    let out = parse_source(F, THREE_FUNS);
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    let items = funs(&out);
    assert_eq!(items.len(), 3);
    assert!(items.iter().all(|i| matches!(i, ParsedItem::Fun(_))));
    let m = out.module.unwrap();
    assert_eq!(m.name.name, "demo");
    assert_eq!(m.address.value, Address(1));
}

#[test]
fn malformed_parameter_list_is_contained() {
    // same length as the original so untouched items keep their offsets
    let broken = THREE_FUNS.replace("(a: u64, b: u64)", "(a$ u64, b: u64)");
    assert_eq!(broken.len(), THREE_FUNS.len());
    let good = parse_source(F, THREE_FUNS);
    let bad = parse_source(F, &broken);
    let good_items = funs(&good);
    let bad_items = funs(&bad);
    assert_eq!(bad_items.len(), 3);
    assert!(matches!(bad_items[1], ParsedItem::Error(_)));
    assert_eq!(good_items[0], bad_items[0]);
    assert_eq!(good_items[2], bad_items[2]);
    assert!(!bad.diagnostics.is_empty());
    // the error region covers the whole second function
    let region = bad_items[1].loc();
    assert!(region.slice(&broken).starts_with("fun two"));
    assert!(region.slice(&broken).ends_with("c }"));
}

#[test]
fn incomplete_field_access_in_let() {
    let src = "module 0x1::m { fun f(p: P): u64 { let x = p. } }";
    let out = parse_source(F, src);
    let ParsedItem::Fun(f) = &funs(&out)[0] else {
        panic!("expected a function")
    };
    let ExprKind::Block(b) = &f.body.kind else {
        panic!()
    };
    let ExprKind::Let { name, init } = &b.stmts[0].kind else {
        panic!("expected let, got {:?}", b.stmts[0].kind)
    };
    assert_eq!(name.name, "x");
    match &init.kind {
        ExprKind::IncompleteFieldAccess { receiver } => {
            assert!(matches!(&receiver.kind, ExprKind::Var(v) if v.name == "p"))
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(out.diagnostics.len(), 1);
}

#[test]
fn unterminated_statement_before_next_let() {
    let src = "module 0x1::m { fun f(p: P): u64 { let x = p.\n let y = 2; y } }";
    let out = parse_source(F, src);
    let ParsedItem::Fun(f) = &funs(&out)[0] else {
        panic!()
    };
    let ExprKind::Block(b) = &f.body.kind else {
        panic!()
    };
    assert_eq!(b.stmts.len(), 2);
    assert!(b.tail.is_some());
}

#[test]
fn unclosed_body_stops_at_next_item() {
    let src = "module 0x1::m {\n fun f(p: P): u64 { p.\n fun g(): u64 { 1 }\n}";
    let out = parse_source(F, src);
    let items = funs(&out);
    assert_eq!(items.len(), 2);
    assert!(matches!(items[1], ParsedItem::Fun(g) if g.name.name == "g"));
}

#[test]
fn path_calls_and_uses() {
    let src = "module 0x2::app {
        use 0x1::std;
        use 0x1::coin as c;
        record Point { x: u64, y: std::Num }
        public inline fun f(p: Point): u64 { std::min(p.x, 0x1::coin::value(c::zero())) }
    }";
    let out = parse_source(F, src);
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    let items = funs(&out);
    assert!(matches!(items[1], ParsedItem::Use(u) if u.alias_name() == "c"));
    let ParsedItem::Fun(f) = items[3] else {
        panic!()
    };
    assert!(f.is_public && f.is_inline);
    let ExprKind::Block(b) = &f.body.kind else {
        panic!()
    };
    let ExprKind::PathCall { path, args } = &b.tail.as_ref().unwrap().kind else {
        panic!()
    };
    assert_eq!(path.to_string(), "std::min");
    assert!(
        matches!(&args[1].kind, ExprKind::PathCall { path, .. } if path.to_string() == "0x1::coin::value")
    );
}

#[test]
fn binary_precedence() {
    let src = "module 0x1::m { fun f(a: u64): bool { a + 1 * 2 < 3 && true || false } }";
    let out = parse_source(F, src);
    assert!(out.diagnostics.is_empty());
    let ParsedItem::Fun(f) = &funs(&out)[0] else {
        panic!()
    };
    let ExprKind::Block(b) = &f.body.kind else {
        panic!()
    };
    let ExprKind::BinOp { op, .. } = &b.tail.as_ref().unwrap().kind else {
        panic!()
    };
    assert_eq!(*op, BinOp::Or);
}

#[test]
fn missing_module_header() {
    let out = parse_source(F, "fun f(): u64 { 1 }");
    assert!(out.module.is_none());
    assert_eq!(out.diagnostics.len(), 1);
}

#[test]
fn stray_tokens_between_items() {
    let src = "module 0x1::m { fun a(): u64 { 1 } x y ; fun b(): u64 { 2 } }";
    let out = parse_source(F, src);
    let items = funs(&out);
    assert_eq!(items.len(), 3);
    assert!(matches!(items[1], ParsedItem::Error(_)));
}

#[test]
fn stray_close_brace_keeps_later_items() {
    let src = THREE_FUNS.replacen(
        "fun two(a: u64, b: u64): u64 {",
        "fun two(a: u64, b: u64): u64 $",
        1,
    );
    let out = parse_source(F, &src);
    assert!(!out.diagnostics.is_empty());
    let names: Vec<&str> = funs(&out)
        .iter()
        .filter_map(|i| match i {
            ParsedItem::Fun(f) => Some(f.name.name.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(names, ["one", "three"]);

    let src = "module 0x1::m {\n fun a(): u64 { if true $ 1 } else { 2 } }\n fun b(): u64 { 3 }\n}";
    let out = parse_source(F, src);
    assert!(matches!(funs(&out).last(), Some(ParsedItem::Fun(b)) if b.name.name == "b"));
    assert!(out
        .diagnostics
        .iter()
        .all(|d| d.code != crate::diagnostics::codes::TRAILING_INPUT));
}

#[test]
fn deep_nesting_does_not_overflow() {
    let src = format!(
        "module 0x1::m {{ fun f(): u64 {{ {}1 }} }}",
        "(".repeat(5000)
    );
    let out = parse_source(F, &src);
    assert!(!out.diagnostics.is_empty());
}

/// Character-class lexer used as an independent oracle for token kinds.
fn reference_kinds(text: &str) -> Vec<&'static str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1).map(|x| x.1) == Some('/') {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let word: String = chars[s..i].iter().map(|x| x.1).collect();
            let kws = [
                "module", "record", "fun", "public", "inline", "use", "as", "let", "if", "else",
                "true", "false",
            ];
            out.push(if kws.contains(&word.as_str()) {
                "kw"
            } else {
                "ident"
            });
        } else if c.is_ascii_digit() {
            let hex = c == '0'
                && chars.get(i + 1).map(|x| x.1) == Some('x')
                && chars.get(i + 2).is_some_and(|x| x.1.is_ascii_hexdigit());
            if hex {
                i += 2;
                while i < chars.len() && chars[i].1.is_ascii_hexdigit() {
                    i += 1;
                }
                out.push("addr");
            } else {
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                out.push("int");
            }
        } else {
            let next = chars.get(i + 1).map(|x| x.1);
            let pair = matches!(
                (c, next),
                (':', Some(':')) | ('=', Some('=')) | ('&', Some('&')) | ('|', Some('|'))
            );
            if pair {
                i += 2;
                out.push("punct");
            } else if "{}(),;:.+-*=<".contains(c) {
                i += 1;
                out.push("punct");
            } else {
                i += 1;
                out.push("error");
            }
        }
    }
    out
}

fn class(kind: TokenKind) -> &'static str {
    match kind {
        TokenKind::Keyword(_) => "kw",
        TokenKind::Ident => "ident",
        TokenKind::IntLit => "int",
        TokenKind::AddressLit => "addr",
        TokenKind::Punct(_) => "punct",
        TokenKind::Error => "error",
    }
}

#[test]
fn lexer_agrees_with_reference_on_corpus() {
    let corpus = [
        "fun $ f",
        THREE_FUNS,
        "module 0x1::m { use 0x1::std as s; record R { a: u64 } }",
        "a&b|c==d 0x 0xfg 12ab // trailing\n€ x",
        "let x = p.; 0x1::coin::",
    ];
    for text in corpus {
        let lexed = tokenize(text, F);
        let ours: Vec<_> = lexed.tokens.iter().map(|t| class(t.kind)).collect();
        assert_eq!(ours, reference_kinds(text), "on {text:?}");
        let errors = ours.iter().filter(|k| **k == "error").count();
        assert_eq!(errors, lexed.diagnostics.len());
    }
}

fn source_strategy() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "module", " 0x1", "::", "m", "{", "}", "(", ")", "fun", "f", "x", ":", "u64", ",", ";",
        "let", "=", ".", "p", "1", "+", "if", "else", "record", "use", "public", "inline", " ",
        "\n", "$", "é", "// c\n", "0x", "&&", "<", "==", "true",
    ]);
    prop::collection::vec(pieces, 0..80).prop_map(|v| v.concat())
}

fn check_coverage(text: &str, out: &ParseOutcome) {
    let Some(m) = &out.module else { return };
    let lexed = tokenize(text, F);
    let open = lexed
        .tokens
        .iter()
        .position(|t| t.kind == TokenKind::Punct(Punct::LBrace))
        .unwrap();
    for t in &lexed.tokens[open + 1..] {
        if t.loc.end > m.loc.end
            || (t.loc.end == m.loc.end && t.kind == TokenKind::Punct(Punct::RBrace))
        {
            break;
        }
        assert!(
            m.items.iter().any(|i| i.loc().encloses(&t.loc)),
            "token {:?} at {} not covered in {text:?}",
            t.text(text),
            t.loc.start
        );
    }
    for w in m.items.windows(2) {
        assert!(w[0].loc().end <= w[1].loc().start, "items overlap");
    }
}

proptest! {
    #[test]
    fn parse_is_total_and_covering(text in source_strategy()) {
        let out = parse_source(F, &text);
        for d in &out.diagnostics {
            prop_assert!(d.loc.end as usize <= text.len());
            prop_assert_eq!(d.loc.file, F);
        }
        if let Some(m) = &out.module {
            for item in &m.items {
                if let ParsedItem::Error(_) = item {
                    prop_assert!(!out.diagnostics.is_empty());
                }
            }
        }
        check_coverage(&text, &out);
    }

    #[test]
    fn tokens_and_trivia_reconstruct_input(text in "\\PC{0,200}") {
        let lexed = tokenize(&text, F);
        prop_assert_eq!(lexed.reconstruct(&text), text.clone());
        let _ = parse_source(F, &text);
    }

    #[test]
    fn single_item_corruption_is_local(which in 0usize..3, junk in prop::sample::select(vec!["$", "::", "(", ",", "let", "=", "0x1"])) {
        // corrupt the signature of one function; the other two are unaffected
        let names = ["one(", "two(", "three("];
        let target = names[which];
        let at = THREE_FUNS.find(target).unwrap() + target.len();
        let mut broken = THREE_FUNS.to_string();
        broken.insert_str(at, junk);
        let shift = junk.len() as u32;
        let good = parse_source(F, THREE_FUNS);
        let bad = parse_source(F, &broken);
        let good_items = funs(&good);
        let bad_items = funs(&bad);
        prop_assert_eq!(bad_items.len(), 3);
        for (i, (g, b)) in good_items.iter().zip(&bad_items).enumerate() {
            if i == which {
                continue;
            }
            let (ParsedItem::Fun(g), ParsedItem::Fun(b)) = (g, b) else {
                return Err(TestCaseError::fail(format!("item {i} changed kind")));
            };
            prop_assert_eq!(&g.name.name, &b.name.name);
            let delta = if i > which { shift } else { 0 };
            prop_assert_eq!(g.loc.start + delta, b.loc.start);
            prop_assert_eq!(g.loc.len(), b.loc.len());
            prop_assert_eq!(g.params.len(), b.params.len());
        }
    }
}
