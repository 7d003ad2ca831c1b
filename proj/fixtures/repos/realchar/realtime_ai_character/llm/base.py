from abc import ABC, abstractmethod


class LLM(ABC):
    @abstractmethod
    async def achat(self, history, user_input, user_input_template, callback, character, metadata=None):
        ...

    @abstractmethod
    def get_config(self):
        ...
