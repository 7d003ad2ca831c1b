import os

import yaml
from langchain.chat_models import ChatOpenAI
from langchain.schema import BaseMessage, HumanMessage

from realtime_ai_character.database.chroma import get_chroma
from realtime_ai_character.llm.base import LLM
from realtime_ai_character.utils import Character

CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "config.yaml")


def load_llm_settings(path=CONFIG_PATH):
    with open(path) as fh:
        return yaml.safe_load(fh)["llm"]


class OpenaiLlm(LLM):
    def __init__(self, model):
        settings = load_llm_settings()
        self.config = {
            "model": model or settings["model"],
            "temperature": settings.get("temperature", 0.5),
            "streaming": settings.get("streaming", True),
        }
        self.chat_open_ai = ChatOpenAI(**self.config)
        self.db = get_chroma()

    def get_config(self):
        return self.config

    async def achat(self, history, user_input, user_input_template, callback, character, metadata=None):
        context = self._generate_context(user_input, character)
        history.append(HumanMessage(content=user_input_template.format(context=context, query=user_input)))
        response = await self.chat_open_ai.agenerate([history], callbacks=[callback], metadata=metadata)
        return response.generations[0][0].text

    def _generate_context(self, query, character: Character):
        docs = self.db.similarity_search(query)
        docs = [d for d in docs if d.metadata["character_name"] == character.name]
        return "\n".join(d.page_content for d in docs)
