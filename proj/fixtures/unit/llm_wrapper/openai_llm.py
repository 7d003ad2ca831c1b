import yaml
from langchain.chat_models import ChatOpenAI

CONFIG_FILE = "config.yaml"


class OpenaiLlm(BaseLlm):
    streaming = True

    def __init__(self, model):
        self.chat_open_ai = ChatOpenAI(model=model, temperature=load_temperature())

    async def achat(self, history, callback):
        return await self.chat_open_ai.agenerate([history], callbacks=[callback])


def load_temperature():
    with open(CONFIG_FILE) as fh:
        return yaml.safe_load(fh)["temperature"]
