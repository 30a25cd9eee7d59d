//! Utterance tables shared by the spoken-parser tests and the acceptance run.

/// Each row lists three phrasings of the same expression.
pub const SYNONYM_TRIPLES: &[[&str; 3]] = &[
    ["x over 3", "x divided by 3", "x by 3"],
    ["x squared", "x to the second", "x to the power of two"],
    ["y equals 2", "y is equal to 2", "y equal to two"],
    ["x cubed", "x to the third", "x raised to the third power"],
    ["x times y", "x multiplied by y", "x * y"],
    ["x minus 1", "x - 1", "x minus one"],
    ["negative x", "minus x", "-x"],
    ["square root of x", "the square root of x", "second root of x"],
    ["cube root of x", "the cube root of x", "third root of x"],
    ["sine of x", "sin x", "the sine of x"],
    ["cosine of theta", "cos theta", "cos of theta"],
    ["natural log of x", "ln x", "natural logarithm of x"],
    ["pi over two", "pi divided by 2", "pi by two"],
    ["e to the x", "e raised to the x", "e to the power of x"],
    ["x less than or equal to y", "x is less than or equal to y", "x at most y"],
    ["x greater than y", "x is greater than y", "x > y"],
    [
        "integral from zero to one of x dx",
        "integral from 0 to 1 of x d x",
        "the integral from zero to one of x with respect to x",
    ],
    ["theta one", "theta sub one", "theta subscript 1"],
    ["n sub two", "n subscript two", "n sub 2"],
    ["two x plus one", "2x + 1", "2 x plus one"],
    ["x to the n", "x to the power of n", "x raised to the n"],
    [
        "sum from i equals 1 to n of i",
        "the sum from i equals one to n of i",
        "summation from i = 1 to n of i",
    ],
    [
        "derivative of x squared with respect to x",
        "the derivative of x squared with respect to x",
        "first derivative of x squared with respect to x",
    ],
    [
        "(x + 1)(x - 1)",
        "open paren x plus one close paren open paren x minus one close paren",
        "(x plus 1)(x minus 1)",
    ],
    ["index of refraction one", "refractive index one", "n sub one"],
];

/// (utterance, expected LaTeX, expected residual text)
pub const ISOLATION_CASES: &[(&str, &str, &str)] = &[
    (
        "I was thinking about the integral of e to the negative x squared",
        "\\int e^{-x^2} \\, dx",
        "I was thinking about",
    ),
    ("okay so x plus one", "x + 1", "okay so"),
    ("um let me see, x over 3", "\\frac{x}{3}", "um let me see"),
    ("so basically it's y equals m x plus b I think", "y = m x + b", "so basically it's I think"),
    ("can you write the square root of two please", "\\sqrt{2}", "can you write please"),
    ("hmm what about sine of theta", "\\sin(\\theta)", "hmm what about"),
    ("let's try x squared minus four and see", "x^2 - 4", "let's try and see"),
    ("the answer should be pi over two right", "\\frac{\\pi}{2}", "the answer should be right"),
    ("write down two x plus three y equals seven for me", "2x + 3y = 7", "write down for me"),
    (
        "alright the derivative of x cubed with respect to x is what I need",
        "\\frac{\\mathrm{d}}{\\mathrm{d}x} x^3",
        "alright is what I need",
    ),
];

/// (utterance, expected LaTeX)
pub const APPENDIX_PROMPTS: &[(&str, &str)] = &[
    ("The integral from zero to infinity of x squared, dx", "\\int_0^{\\infty} x^2 \\, dx"),
    ("The integral from zero to pi over two, cosine of x, dx", "\\int_0^{\\frac{\\pi}{2}} \\cos(x) \\, dx"),
    (
        "Index of refraction one sine of theta one equals index of refraction two sine of theta two",
        "n_1 \\sin(\\theta_1) = n_2 \\sin(\\theta_2)",
    ),
];
