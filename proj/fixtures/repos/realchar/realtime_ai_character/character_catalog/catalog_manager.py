import os

import yaml

from realtime_ai_character.database.chroma import get_chroma
from realtime_ai_character.utils import Character


class CatalogManager:
    def __init__(self, catalog_dir):
        self.catalog_dir = catalog_dir
        self.db = get_chroma()
        self.characters = {}

    def load_characters(self):
        for name in sorted(os.listdir(self.catalog_dir)):
            path = os.path.join(self.catalog_dir, name, "config.yaml")
            if not os.path.exists(path):
                continue
            with open(path) as fh:
                spec = yaml.safe_load(fh)
            self.characters[spec["character_id"]] = Character(
                character_id=spec["character_id"],
                name=spec["character_name"],
                llm_system_prompt=spec["system"],
                llm_user_prompt=spec["user"],
                voice_id=spec.get("voice_id", ""),
            )
        return self.characters

    def get_character(self, character_id):
        return self.characters.get(character_id)
