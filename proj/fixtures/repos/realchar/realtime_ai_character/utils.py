from dataclasses import dataclass, field

from langchain.schema import AIMessage, BaseMessage, HumanMessage, SystemMessage


@dataclass
class Character:
    character_id: str
    name: str
    llm_system_prompt: str
    llm_user_prompt: str
    voice_id: str = ""


@dataclass
class ConversationHistory:
    system_prompt: str = ""
    user: list = field(default_factory=list)
    ai: list = field(default_factory=list)

    def __iter__(self):
        yield self.system_prompt
        for user_message, ai_message in zip(self.user, self.ai):
            yield user_message
            yield ai_message

    def load_from_db(self, session_id, db):
        rows = db.query_history(session_id)
        self.user.extend(r.client_message for r in rows)
        self.ai.extend(r.server_message for r in rows)


def build_history(conversation_history):
    history = []
    for i, message in enumerate(conversation_history):
        if i == 0:
            history.append(SystemMessage(content=message))
        elif i % 2 == 1:
            history.append(HumanMessage(content=message))
        else:
            history.append(AIMessage(content=message))
    return history[:1]
