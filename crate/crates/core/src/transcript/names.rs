// Bundled name lexicon. Words that double as months or common nouns
// (April, May, June, Will, Bill) are left out on purpose.

pub(super) const GIVEN: &[&str] = &[
    "Aaliyah", "Aaron", "Abigail", "Adam", "Aiden", "Aisha", "Alex", "Alexander", "Alice", "Alicia", "Amara",
    "Amelia", "Amir", "Ana", "Andre", "Andrew", "Angela", "Anna", "Anthony", "Aria", "Aurora", "Ava", "Benjamin",
    "Bella", "Brandon", "Brian", "Caleb", "Camila", "Carlos", "Caroline", "Carter", "Charlotte", "Chen", "Chloe",
    "Chris", "Christopher", "Daniel", "David", "Diego", "Dylan", "Elena", "Eli", "Elijah", "Elizabeth", "Ella",
    "Emily", "Emma", "Ethan", "Evelyn", "Fatima", "Gabriel", "Grace", "Hana", "Hannah", "Harper", "Henry",
    "Hiroshi", "Ian", "Isaac", "Isabella", "Jack", "Jackson", "Jacob", "James", "Jamal", "Jasmine", "Jayden",
    "Jennifer", "Jessica", "John", "Jordan", "Jose", "Joseph", "Joshua", "Juan", "Julia", "Kai", "Karen",
    "Kevin", "Laura", "Layla", "Leah", "Leo", "Liam", "Lily", "Linda", "Lucas", "Lucia", "Luis", "Luna", "Maria",
    "Marcus", "Mateo", "Matthew", "Maya", "Mia", "Michael", "Mila", "Mohammed", "Nadia", "Naomi", "Nathan",
    "Nina", "Noah", "Nora", "Oliver", "Olivia", "Omar", "Priya", "Rafael", "Rahul", "Rebecca", "Riley", "Rosa",
    "Ryan", "Samuel", "Santiago", "Sara", "Sarah", "Sebastian", "Sofia", "Sophia", "Stella", "Susan", "Thomas",
    "Tyler", "Valentina", "Victoria", "William", "Wei", "Yusuf", "Zara", "Zoe",
];

pub(super) const SURNAMES: &[&str] = &[
    "Ahmed", "Alvarez", "Anderson", "Brown", "Chen", "Clark", "Davis", "Diaz", "Doe", "Garcia", "Gonzalez",
    "Harris", "Hernandez", "Jackson", "Johnson", "Jones", "Khan", "Kim", "Lee", "Lewis", "Lopez", "Martin",
    "Martinez", "Miller", "Moore", "Nguyen", "Patel", "Perez", "Ramirez", "Robinson", "Rodriguez", "Ruiz",
    "Sanchez", "Singh", "Smith", "Taylor", "Thomas", "Thompson", "Torres", "Walker", "White", "Williams",
    "Wilson", "Wright", "Young",
];

/// Honorifics that make a following capitalized word a surname.
pub(super) const TITLES: &[&str] = &["Mr", "Mrs", "Ms", "Miss", "Dr", "Mx"];
