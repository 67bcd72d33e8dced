from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
FIXTURE_DIR = REPO_ROOT / "fixtures"
MEDICAL_DOCUMENT = REPO_ROOT / "tests" / "fixtures" / "medical.forest.json"
