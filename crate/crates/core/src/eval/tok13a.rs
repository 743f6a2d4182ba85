use std::sync::LazyLock;

use regex::Regex;

struct Rule {
    re: Regex,
    repl: &'static str,
}

static RULES: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    let rule = |pat: &str, repl: &'static str| Rule {
        re: Regex::new(pat).expect("static 13a pattern"),
        repl,
    };
    vec![
        // symbols: { | } ~ [ \ ] ^ _ ` space ! " # $ % & ( ) * + : ; < = > ? @ /
        rule(r"([{-~\[-` -&(-+:-@/])", " $1 "),
        // period and comma unless preceded by a digit
        rule(r"([^0-9])([.,])", "$1 $2 "),
        // period and comma unless followed by a digit
        rule(r"([.,])([^0-9])", " $1 $2"),
        // dash preceded by a digit
        rule(r"([0-9])(-)", "$1 $2 "),
    ]
});

/// Tokenises `text` with the WMT 13a rules used by the standard BLEU tools.
///
/// Rules, applied in order to `" " + line + " "`:
///
/// 1. drop `<skipped>`, join `-\n` line-end hyphenation, turn newlines into spaces;
/// 2. if `&` occurs, unescape `&quot;`, `&amp;`, `&lt;`, `&gt;`;
/// 3. pad ASCII symbols other than `.` `,` `-` `'` with spaces;
/// 4. split `.`/`,` from a preceding non-digit and from a following non-digit;
/// 5. split `-` after a digit;
/// 6. split on whitespace.
pub fn tokenize_13a(text: &str) -> Vec<String> {
    let mut line = text.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let mut line = format!(" {line} ");
    for rule in RULES.iter() {
        line = rule.re.replace_all(&line, rule.repl).into_owned();
    }
    line.split_whitespace().map(str::to_string).collect()
}
