from chatbot.config.loader import load_settings
from chatbot.llm.client import ChatClient
from chatbot.memory.store import MemoryStore
from chatbot.prompts.render import render_system_prompt


class ChatBot:
    def __init__(self):
        self.settings = load_settings()
        memory = self.settings["memory"]
        self.memory = MemoryStore(memory["collection"], memory["persist_path"], memory["top_k"])
        self.client = ChatClient(self.settings)
        self.turns = 0

    def reply(self, user_message):
        facts = self.memory.recall(user_message)
        system_prompt = render_system_prompt(self.settings["persona"], facts)
        answer = self.client.complete(system_prompt, user_message)
        self.turns += 1
        self.memory.remember(f"turn-{self.turns}", f"user: {user_message}\nassistant: {answer}")
        return answer
