import json
from pathlib import Path

MODEL_FILE = Path(__file__).with_name("model.json")


def load_model_config(path=MODEL_FILE):
    with open(path) as fh:
        return json.load(fh)
