// Regex tokenizer + HTML renderer for the entity-modeling DSL.  Output is
// escaped text wrapped in <span class="tok-..."> elements, safe to inject
// with innerHTML.

export type TokenClass =
    | "keyword"
    | "type"
    | "arrow"
    | "ident"
    | "number"
    | "string"
    | "comment"
    | "punct"
    | "text";

export interface Token {
    cls: TokenClass;
    text: string;
}

const KEYWORDS = new Set([
    "main", "concept", "enum", "extends", "isId", "subset", "of",
    "one", "some", "lone", "true", "false",
]);

const TYPES = new Set(["string", "int", "float", "bool", "date"]);

// Order matters: comments and strings first, the longer arrow before the
// shorter one, floats before ints.
const PATTERNS: Array<[TokenClass, RegExp]> = [
    ["comment", /^\/\/[^\n]*/],
    ["comment", /^\/\*[\s\S]*?\*\//],
    ["string", /^"(?:[^"\\\n]|\\.)*"/],
    ["arrow", /^<>-->/],
    ["arrow", /^-->/],
    ["number", /^\d+\.\d+/],
    ["number", /^\d+/],
    ["ident", /^[A-Za-z_][A-Za-z0-9_]*/],
    ["punct", /^[{}();:,=.\[\]]/],
    ["text", /^\s+/],
];

export function tokenize(source: string): Token[] {
    const tokens: Token[] = [];
    let rest = source;
    while (rest.length > 0) {
        let matched = false;
        for (const [cls, pattern] of PATTERNS) {
            const m = pattern.exec(rest);
            if (m && m[0].length > 0) {
                let tokenClass = cls;
                if (cls === "ident") {
                    if (KEYWORDS.has(m[0])) tokenClass = "keyword";
                    else if (TYPES.has(m[0])) tokenClass = "type";
                }
                tokens.push({cls: tokenClass, text: m[0]});
                rest = rest.slice(m[0].length);
                matched = true;
                break;
            }
        }
        if (!matched) {
            tokens.push({cls: "text", text: rest[0]});
            rest = rest.slice(1);
        }
    }
    return tokens;
}

export function escapeHtml(text: string): string {
    return text
        .replaceAll("&", "&amp;")
        .replaceAll("<", "&lt;")
        .replaceAll(">", "&gt;")
        .replaceAll('"', "&quot;");
}

export function highlight(source: string): string {
    return tokenize(source)
        .map((token) =>
            token.cls === "text"
                ? escapeHtml(token.text)
                : `<span class="tok-${token.cls}">${escapeHtml(token.text)}</span>`)
        .join("");
}
