from openai import OpenAI

from agentkit.config import load_model_config
from agentkit.tools.registry import tool_schemas


class ModelClient:
    def __init__(self):
        self.settings = load_model_config()
        self.client = OpenAI()

    def chat(self, messages):
        response = self.client.chat.completions.create(
            model=self.settings["model"],
            temperature=self.settings["temperature"],
            max_tokens=self.settings["max_tokens"],
            parallel_tool_calls=self.settings["parallel_tool_calls"],
            tools=tool_schemas(),
            messages=messages,
        )
        return response.choices[0].message
