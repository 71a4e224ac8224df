//! Deterministic synthetic evaluation workload: contexts of roughly 40
//! lines ending in a documented function header, and 15-line bodies with a
//! realistic mix of clean code, lint findings and syntax errors.

use complint_core::attribution::CompletionSample;
use complint_core::Problem;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: &[&str] = &[
    "items", "count", "total", "result", "path", "name", "value", "index", "buffer", "config",
    "node", "parent", "key", "record", "offset", "size",
];
const MODULES: &[&str] = &[
    "os",
    "sys",
    "json",
    "re",
    "math",
    "itertools",
    "collections",
    "typing",
];

pub struct Corpus {
    pub problems: Vec<Problem>,
    pub samples: Vec<CompletionSample>,
}

/// `problems * per_problem` samples, reproducible from `seed`.
pub fn corpus(problems: usize, per_problem: u32, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Corpus {
        problems: Vec::with_capacity(problems),
        samples: Vec::with_capacity(problems * per_problem as usize),
    };
    for p in 0..problems {
        let id = format!("{p:08x}");
        let context = context(&mut rng);
        for s in 0..per_problem {
            out.samples.push(CompletionSample {
                problem_id: id.clone(),
                sample_index: s,
                completion: completion(&mut rng),
                provenance: None,
            });
        }
        out.problems.push(Problem {
            id,
            path: format!("pkg/mod_{p}.py"),
            groundtruth: completion(&mut rng),
            context,
            context_tokens: 0,
            groundtruth_tokens: 0,
        });
    }
    out
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

fn context(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::from("\"\"\"Synthetic module.\"\"\"\n");
    let mut mods = MODULES.to_vec();
    mods.shuffle(rng);
    for m in &mods[..4] {
        s += &format!("import {m}\n");
    }
    s += "from typing import Dict, List, Optional\n\nLIMIT = 128\n\n\n";
    let class = format!("Store{}", rng.gen_range(0..100));
    s += &format!("class {class}:\n    \"\"\"Keeps records.\"\"\"\n\n");
    s +=
        "    def __init__(self, size=LIMIT):\n        self.size = size\n        self.data = {}\n\n";
    s += "    def get(self, key, default=None):\n        return self.data.get(key, default)\n\n";
    s += "    def put(self, key, value):\n        if len(self.data) >= self.size:\n";
    s += "            self.data.pop(next(iter(self.data)))\n        self.data[key] = value\n\n\n";
    for i in 0..2 {
        let a = pick(rng, NAMES);
        s += &format!("def helper_{i}({a}, scale=2):\n");
        s += &format!("    \"\"\"Scale {a}.\"\"\"\n");
        s += &format!("    if {a} is None:\n        return 0\n    return {a} * scale\n\n\n");
    }
    let (a, b) = (pick(rng, NAMES), pick(rng, NAMES));
    s += &format!("def process({a}: List[int], {b}_map: Dict[str, int]) -> Optional[int]:\n");
    s += &format!("    \"\"\"Combine {a} with the entries of {b}_map.\"\"\"\n");
    s
}

fn completion(rng: &mut ChaCha8Rng) -> String {
    let mut lines = Vec::with_capacity(16);
    lines.push(format!("    store = Store{}()", rng.gen_range(0..100)));
    let mut physical = 1;
    while physical < 14 {
        let n = pick(rng, NAMES);
        let m = pick(rng, NAMES);
        let line = match rng.gen_range(0..10) {
            0 => format!("    for {n} in range(len({m})):\n        store.put({n}, helper_0({n}))"),
            1 => format!("    {n} = helper_1({m}) if {m} else None"),
            2 => format!("    if {n} > LIMIT:\n        return None"),
            3 => format!("    {n} = [x * 2 for x in {m} if x]"),
            4 => format!(
                "    try:\n        {n} = int({m})\n    except ValueError as err:\n        {n} = 0"
            ),
            5 => format!("    print(f\"{n}: {{{m}}}\")"),
            6 => format!("    {n} = sum({m}) / max(1, len({m}))"),
            7 => format!("    with open({m}) as fh:\n        {n} = fh.read()"),
            8 => format!("    {n}_map[\"{m}\"] = store.get({n})"),
            _ => format!("    {n} = {{k: v for k, v in {m}.items()}}"),
        };
        physical += line.matches('\n').count() + 1;
        lines.push(line);
    }
    // Roughly one in eight completions is cut off or malformed.
    match rng.gen_range(0..16) {
        0 => lines.push("    return helper_0(total,".into()),
        1 => lines.push("    return total +* 2".into()),
        _ => lines.push(format!("    return {}", pick(rng, NAMES))),
    }
    let mut s = lines.join("\n");
    s.push('\n');
    s
}
