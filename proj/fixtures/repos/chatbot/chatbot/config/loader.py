import os
from pathlib import Path

import yaml

SETTINGS_FILE = Path(__file__).with_name("settings.yaml")


def load_settings(path=SETTINGS_FILE):
    with open(path) as fh:
        settings = yaml.safe_load(fh)
    env_name = settings["llm"]["api_key_env"]
    settings["llm"]["api_key"] = os.environ.get(env_name, "")
    return settings
