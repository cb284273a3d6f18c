//! Seeded corpus sampling for manifests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use typetwo::algebra::enum_algebraic;
use typetwo::problems::TRANSDUCERS;

type Gen = ChaCha8Rng;

fn bits(rng: &mut Gen, len: usize) -> String {
    (0..len).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()
}

/// `u:v` over {0,1}.
fn binary(rng: &mut Gen) -> String {
    let (a, b) = (rng.gen_range(0..7), rng.gen_range(1..4));
    format!("{}:{}", bits(rng, a), bits(rng, b))
}

/// At most three 0s, all early, then 1s.
fn few_early_zeros(rng: &mut Gen) -> String {
    let len = rng.gen_range(0..10);
    let mut word: Vec<char> = vec!['1'; len];
    let zeros = rng.gen_range(0..=3.min(len));
    for i in rand::seq::index::sample(rng, len, zeros) {
        word[i] = '0';
    }
    format!("{}:1", word.into_iter().collect::<String>())
}

fn nat_word(rng: &mut Gen, len: usize, top: u64) -> String {
    (0..len).map(|_| rng.gen_range(0..=top).to_string()).collect::<Vec<_>>().join(",")
}

fn nat_seq(rng: &mut Gen, top: u64) -> String {
    let (a, b) = (rng.gen_range(0..5), rng.gen_range(1..4));
    format!("{}:{}", nat_word(rng, a, top), nat_word(rng, b, top))
}

fn subset(rng: &mut Gen, top: u64, min: usize) -> Vec<u64> {
    let n = rng.gen_range(min..5);
    let mut s: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=top)).collect();
    s.sort_unstable();
    s.dedup();
    s
}

fn set(elems: &[u64]) -> String {
    let body: Vec<String> = elems.iter().map(u64::to_string).collect();
    format!("{{{}}}", body.join(","))
}

fn closed(rng: &mut Gen, allow_empty: bool) -> String {
    if rng.gen_bool(0.3) {
        format!("coset:{}", set(&subset(rng, 12, 0)))
    } else {
        format!("set:{}", set(&subset(rng, 20, usize::from(!allow_empty))))
    }
}

fn open(rng: &mut Gen, allow_empty: bool) -> String {
    format!("set:{}", set(&subset(rng, 20, usize::from(!allow_empty))))
}

fn rational(rng: &mut Gen, signed: bool) -> String {
    let n: i64 = rng.gen_range(0..40);
    let n = if signed && rng.gen_bool(0.3) { -n } else { n };
    format!("rat:{}/{}", n, rng.gen_range(1..13))
}

const LIMITS: [&str; 10] = [
    "lim:e",
    "lim:liouville",
    "lim:liouville2",
    "lim:liouville3",
    "lim:liouville4",
    "lim:liouville5",
    "lim:liouville6",
    "lim:liouville7",
    "lim:liouville8",
    "lim:liouville9",
];

fn real(rng: &mut Gen) -> String {
    match rng.gen_range(0..10) {
        0..=3 => rational(rng, true),
        4..=8 => enum_algebraic(rng.gen_range(0..120)).to_string(),
        _ => LIMITS.choose(rng).expect("nonempty").to_string(),
    }
}

/// An early point of the algebraic enumeration, or a transcendental limit.
fn enumerated(rng: &mut Gen, below: usize) -> String {
    if rng.gen_bool(0.8) {
        enum_algebraic(rng.gen_range(0..below)).to_string()
    } else {
        LIMITS.choose(rng).expect("nonempty").to_string()
    }
}

fn rational_seq(rng: &mut Gen) -> String {
    let q = |rng: &mut Gen| format!("{}/{}", rng.gen_range(0..9), rng.gen_range(1..5));
    let prefix: Vec<String> = (0..rng.gen_range(0..5)).map(|_| q(rng)).collect();
    format!("{}:{}", prefix.join(","), q(rng))
}

const REAL_PROGRAMS: [&str; 12] = [
    "idq",
    "ratq",
    "halt_now",
    "diverge",
    "double",
    "is_zero",
    "sign",
    "floor",
    "root_sqrt2",
    "idempotent",
    "root_order",
    "ident",
];

/// Literal number `k` in the source domain of witness `id`.
pub fn sample(id: &str, k: usize, rng: &mut Gen) -> String {
    match id {
        "R1" | "R3e" | "R3f" | "R5" | "R6" => nat_seq(rng, 9),
        "R2" => {
            if rng.gen_bool(0.5) {
                format!("lpo_max@{}", nat_seq(rng, 3))
            } else {
                let k = rng.gen_range(1..4);
                let ins: Vec<String> = (0..k).map(|_| binary(rng)).collect();
                format!("lpo_count@{}", ins.join(";"))
            }
        }
        "R3a" | "R3c" | "R3d" | "R3j" | "R4a" | "R15" => closed(rng, false),
        "R3b" => format!("set:{{{}}}", rng.gen_range(0..25)),
        "R22" => closed(rng, true),
        "R3g" => open(rng, false),
        "R3h" | "R3i" => open(rng, true),
        "R4b" => rational_seq(rng),
        "R7a" | "R7b" | "R8" => rational(rng, false),
        "R9" | "R26" => real(rng),
        "R13" | "R24" => enumerated(rng, 150),
        // the type answer is read at the minimal polynomial's index, so only early points
        "R25" => match k % 30 {
            i @ 0..=19 => enum_algebraic(i).to_string(),
            i => LIMITS[i - 20].to_string(),
        },
        "R10" => {
            let p = REAL_PROGRAMS.choose(rng).expect("nonempty");
            let x =
                if rng.gen_bool(0.6) { rational(rng, true) } else { enum_algebraic(rng.gen_range(0..60)).to_string() };
            format!("{p}@{x}")
        }
        "R11" | "R12b" | "R16" | "R18" | "R19" | "R23" => binary(rng),
        "R12a" => {
            let m = TRANSDUCERS.choose(rng).expect("nonempty").name;
            format!("{m}@{}", binary(rng))
        }
        "R14" => few_early_zeros(rng),
        "R17" => {
            let a = rng.gen_range(0..5);
            format!("{}:{}", nat_word(rng, a, 4), rng.gen_range(0..5))
        }
        "R20" => format!("{}|{}|{}", binary(rng), binary(rng), binary(rng)),
        "R21" => {
            let k = rng.gen_range(1..4);
            let qs: Vec<String> = (0..k).map(|_| binary(rng)).collect();
            format!("{}|{}", nat_seq(rng, k as u64 - 1), qs.join(";"))
        }
        other => panic!("no sampler for {other}"),
    }
}
