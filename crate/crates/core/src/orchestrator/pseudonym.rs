use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;

struct Pool {
    background: &'static str,
    female: &'static [&'static str],
    male: &'static [&'static str],
    surnames: &'static [&'static str],
}

const POOLS: &[Pool] = &[
    Pool {
        background: "Hispanic/Latino",
        female: &[
            "Sofia", "Valentina", "Camila", "Lucia", "Isabella", "Mariana", "Gabriela", "Daniela", "Ximena", "Paola",
            "Renata", "Elena", "Carmen", "Adriana", "Luz",
        ],
        male: &[
            "Mateo", "Santiago", "Diego", "Alejandro", "Javier", "Carlos", "Miguel", "Andres", "Emilio", "Rafael",
            "Tomas", "Luis", "Joaquin", "Marco", "Julian",
        ],
        surnames: &[
            "Rodriguez", "Martinez", "Hernandez", "Lopez", "Gonzalez", "Perez", "Sanchez", "Ramirez", "Torres",
            "Flores", "Rivera", "Gomez", "Diaz", "Morales", "Ortiz",
        ],
    },
    Pool {
        background: "African American",
        female: &[
            "Aaliyah", "Imani", "Nia", "Zuri", "Jasmine", "Maya", "Kiara", "Aniyah", "Destiny", "Jada",
            "Amara", "Tiana", "Naomi", "Ebony", "Layla",
        ],
        male: &[
            "Jamal", "Malik", "Darius", "Marcus", "Andre", "Xavier", "Jalen", "Terrell", "Isaiah", "Elijah",
            "Khalil", "Desmond", "Cameron", "Dominic", "Tyrese",
        ],
        surnames: &[
            "Washington", "Jefferson", "Jackson", "Harris", "Robinson", "Walker", "Brooks", "Coleman", "Bryant",
            "Freeman", "Banks", "Carter", "Mitchell", "Henderson", "Simmons",
        ],
    },
    Pool {
        background: "Asian American",
        female: &[
            "Mei", "Hana", "Yuna", "Priya", "Ananya", "Linh", "Jia", "Sakura", "Min-ji", "Aiko",
            "Kavya", "Mai", "Soo-ah", "Lian", "Riya",
        ],
        male: &[
            "Kenji", "Wei", "Arjun", "Minh", "Hiroshi", "Jun", "Ravi", "Tae-yang", "Haruto", "Rohan",
            "Bao", "Daniel", "Kai", "Sung", "Vikram",
        ],
        surnames: &[
            "Nguyen", "Chen", "Kim", "Patel", "Tanaka", "Wang", "Park", "Liu", "Tran", "Sato", "Singh", "Huang",
            "Le", "Yamamoto", "Choi",
        ],
    },
    Pool {
        background: "Middle Eastern",
        female: &[
            "Layla", "Yasmin", "Noor", "Amira", "Fatima", "Leila", "Zainab", "Mariam", "Salma", "Dina",
            "Rania", "Huda", "Samira", "Aya", "Lina",
        ],
        male: &[
            "Omar", "Yusuf", "Karim", "Ali", "Hassan", "Tariq", "Samir", "Rami", "Ibrahim", "Khalid",
            "Faris", "Nabil", "Adam", "Ziad", "Amir",
        ],
        surnames: &[
            "Haddad", "Khalil", "Nasser", "Saleh", "Mansour", "Aziz", "Farah", "Hamdan", "Rahman", "Karam",
            "Sabbagh", "Darwish", "Najjar", "Qasim", "Othman",
        ],
    },
];

/// Cultural backgrounds with dedicated name pools.
pub const BACKGROUNDS: [&str; 4] = ["Hispanic/Latino", "African American", "Asian American", "Middle Eastern"];

fn find_pool(background: &str) -> Option<&'static Pool> {
    let b = background.trim().to_ascii_lowercase();
    POOLS.iter().find(|p| {
        let name = p.background.to_ascii_lowercase();
        name == b || name.split('/').any(|part| part == b)
    })
}

fn given_names(pool: &Pool, gender: &str) -> Vec<&'static str> {
    match gender.trim().to_ascii_lowercase().as_str() {
        "female" | "f" | "girl" => pool.female.to_vec(),
        "male" | "m" | "boy" => pool.male.to_vec(),
        _ => pool.female.iter().chain(pool.male).copied().collect(),
    }
}

/// Draws "Given Surname" from the background and gender pools. An unknown
/// background draws from all pools together and returns a warning.
pub fn generate_pseudonym<R: Rng + ?Sized>(background: &str, gender: &str, rng: &mut R) -> (String, Option<String>) {
    let (given, surnames, warning): (Vec<&str>, Vec<&str>, _) = match find_pool(background) {
        Some(p) => (given_names(p, gender), p.surnames.to_vec(), None),
        None => (
            POOLS.iter().flat_map(|p| given_names(p, gender)).collect(),
            POOLS.iter().flat_map(|p| p.surnames.iter().copied()).collect(),
            Some(format!("unknown cultural background {background:?}; using pooled names")),
        ),
    };
    let first = given.choose(rng).expect("non-empty pool");
    let last = surnames.choose(rng).expect("non-empty pool");
    (format!("{first} {last}"), warning)
}

/// Pseudonym source that never repeats a full name within its lifetime.
#[derive(Debug, Default)]
pub struct PseudonymGenerator {
    used: HashSet<String>,
    pub warnings: Vec<String>,
}

const MAX_DRAWS: usize = 200;

impl PseudonymGenerator {
    pub fn new() -> Self {
        PseudonymGenerator::default()
    }

    pub fn next<R: Rng + ?Sized>(&mut self, background: &str, gender: &str, rng: &mut R) -> String {
        let mut last = String::new();
        for _ in 0..MAX_DRAWS {
            let (name, warning) = generate_pseudonym(background, gender, rng);
            if let Some(w) = warning {
                if !self.warnings.contains(&w) {
                    tracing::warn!("{w}");
                    self.warnings.push(w);
                }
            }
            if self.used.insert(name.clone()) {
                return name;
            }
            last = name;
        }
        // Pool exhausted: add a middle initial until the name is free.
        let (first, surname) = last.split_once(' ').unwrap_or((last.as_str(), ""));
        let name = ('A'..='Z')
            .map(|c| format!("{first} {c}. {surname}"))
            .find(|n| !self.used.contains(n))
            .unwrap_or_else(|| format!("{first} {surname} {}", self.used.len()));
        self.used.insert(name.clone());
        name
    }
}
