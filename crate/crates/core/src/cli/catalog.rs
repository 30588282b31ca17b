//! Worked examples as problem documents, plus named mappings they share.

use crate::error::{Error, Result};

/// Named catalog mappings: `(name, kind, text)`.
const MAPPINGS: [(&str, &str, &str); 5] = [
    ("F1", "setvalued", "piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))"),
    ("F2", "setvalued", "interval(x1, inf)"),
    ("G", "setvalued", "piecewise(x1 == 0, interval(-inf, inf), point(2))"),
    ("compcont-F", "expr", "piecewise(x1 <= 1 and x1 >= -1, abs(x1), 2 - abs(x1))"),
    ("compcont-g", "expr", "piecewise(x1 == 0, 0, 2)"),
];

/// `(kind, text)` of a named catalog mapping.
pub fn mapping(name: &str) -> Option<(&'static str, &'static str)> {
    MAPPINGS.iter().find(|m| m.0 == name).map(|m| (m.1, m.2))
}

const F1: &str = r#"# F1(0) = [0, 1/2], F1(x) = [1, inf) elsewhere: subregular with modulus 0.
[mapping F1]
kind = catalog
entry = F1

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
map = F1
"#;

const F2: &str = r#"# F2(x) = [x, inf): dist(0, F2(x)) vanishes for every x < 0.
[mapping F2]
kind = catalog
entry = F2

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
map = F2
expect = fail
"#;

const NORM_SPHERE: &str = r#"# The l2 norm decreases toward the origin from every unit vector.
[mapping norm]
kind = expr
expr = "norm2([x1, x2])"

[anchor]
xbar = 1, 0

[task descent]
op = descent-rate
map = norm
expect = fail
"#;

const COMP_CONT: &str = r#"# Both factors have sharp minimizers at 0; F o g vanishes identically.
[mapping F]
kind = catalog
entry = compcont-F

[mapping g]
kind = catalog
entry = compcont-g

[mapping Fg]
kind = compose
outer = F
inner = g

[anchor]
xbar = 0
ybar = 0

[task F-sharp]
op = sharp-min
map = F

[task g-sharp]
op = sharp-min
map = g

[task composite-sms]
op = certify-sms
map = Fg
expect = fail

[task composition-bound]
op = composition
inner = g
outer = F
expect = fail
"#;

const SETVALUED_COMP: &str = r#"# G(0) = R and G(z) = {2} elsewhere; F o G(z) = {0} for z != 0.
[mapping F]
kind = catalog
entry = compcont-F

[mapping G]
kind = catalog
entry = G

[mapping FG]
kind = compose
outer = F
inner = G

[anchor]
xbar = 0
ybar = 0

[task G-sms]
op = certify-sms
map = G

[task composite-sms]
op = certify-sms
map = FG
expect = fail
"#;

const SUBDIFF_QUADGROWTH: &str = r#"# The subdifferential x -> 2x of x^2 at its minimizer.
[mapping dphi]
kind = expr
expr = "2*x1"

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
map = dphi
"#;

const EPS_APPROX: &str = r#"# f(x) = x + 0.2 x sin(1/x) against h = id: defect 0.2, bound 1.25.
[mapping f]
kind = expr
expr = "piecewise(x1 == 0, 0, x1 + 0.2*x1*sin(1/x1))"

[mapping h]
kind = ph
expr = "x1"

[anchor]
xbar = 0

[task approx]
op = eps-approx
map = f
approx = h
"#;

const PREDERIV_ABS: &str = r#"# (|x1|, x2) with the finite fan {I, diag(-1, 1)}: exact, bound 1.
[mapping f]
kind = expr
expr = "[abs(x1), x2]"

[mapping H]
kind = fan
matrices = "1, 0; 0, 1 | -1, 0; 0, 1"
hull = finite

[anchor]
xbar = 0, 0

[task prederivative]
op = prederivative
map = f
fan = H
delta = 0.5
"#;

const GENEQ_COMPLEMENTARITY: &str = r#"# 0 in x - p + N_[0,inf)(x): S(p) = max(p, 0), bound 1 attained.
[mapping f]
kind = expr
expr = "x1 - p1"

[anchor]
pbar = 0
xbar = 0

[task isolated-calmness]
op = geneq-isolated-calmness
base = f
field = nonneg
"#;

const GENEQ_SV_FIELD: &str = r#"# 0 in 2x - p + 0.5 sin(x): bound 2/3, S(p) near p/2.5.
[mapping f]
kind = expr
expr = "2*x1 - p1"

[mapping T]
kind = expr
expr = "0.5*sin(x1)"

[mapping H]
kind = fan
matrices = "2"

[anchor]
pbar = 0
xbar = 0

[task single-valued-field]
op = geneq-single-valued-field
base = f
field = T
fan = H
"#;

const GENEQ_SCALARIZED: &str = r#"# 0 in (|x| - p, 0) + (0.4 x, 0) with a max-affine base: bound 1/0.6.
[mapping f]
kind = expr
expr = "[abs(x1) - p1, 0]"

[mapping fx]
kind = maxaffine
pieces = "(1, 0); (-1, 0) | (0, 0)"

[mapping T]
kind = expr
expr = "[0.4*x1, 0]"

[anchor]
pbar = 0
xbar = 0

[task scalarized]
op = geneq-scalarized
base = f
convex = fx
cone = Rm+
field = T
"#;

/// The identity on ℝⁿ from `l1` to `linf`, injectivity constant `1/n`.
fn l1linf(n: usize) -> String {
    let rows: Vec<String> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(", "))
        .collect();
    format!(
        "# Id_{n} from l1 to linf: alpha = 1/{n}.\n\
         [mapping id]\nkind = linear\nmatrix = \"{}\"\nnorm_in = l1\nnorm_out = linf\n\n\
         [task alpha]\nop = injectivity\nmap = id\n",
        rows.join("; ")
    )
}

/// Every example id, in listing order.
pub fn ids() -> Vec<String> {
    let mut v: Vec<String> = vec!["ex-F1".into(), "ex-F2".into()];
    v.extend((2..=10).map(|n| format!("ex-l1linf-n{n}")));
    v.extend(
        [
            "ex-norm-sphere",
            "ex-comp-cont",
            "ex-setvalued-comp",
            "ex-subdiff-quadgrowth",
            "ex-eps-approx",
            "ex-prederiv-abs",
            "ex-geneq-complementarity",
            "ex-geneq-sv-field",
            "ex-geneq-scalarized",
        ]
        .map(String::from),
    );
    v
}

/// The document of an example.
pub fn document(id: &str) -> Result<String> {
    let fixed = match id {
        "ex-F1" => F1,
        "ex-F2" => F2,
        "ex-norm-sphere" => NORM_SPHERE,
        "ex-comp-cont" => COMP_CONT,
        "ex-setvalued-comp" => SETVALUED_COMP,
        "ex-subdiff-quadgrowth" => SUBDIFF_QUADGROWTH,
        "ex-eps-approx" => EPS_APPROX,
        "ex-prederiv-abs" => PREDERIV_ABS,
        "ex-geneq-complementarity" => GENEQ_COMPLEMENTARITY,
        "ex-geneq-sv-field" => GENEQ_SV_FIELD,
        "ex-geneq-scalarized" => GENEQ_SCALARIZED,
        _ => {
            return id
                .strip_prefix("ex-l1linf-n")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| (2..=10).contains(n))
                .map(l1linf)
                .ok_or_else(|| Error::UnknownExample(id.to_string()))
        }
    };
    Ok(fixed.to_string())
}

/// First comment line of an example, used by `list`.
pub fn summary(id: &str) -> Result<String> {
    let doc = document(id)?;
    Ok(doc.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("").to_string())
}
