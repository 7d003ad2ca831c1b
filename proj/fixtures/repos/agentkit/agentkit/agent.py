from agentkit.llm import ModelClient
from agentkit.tools.registry import run_tool_call

SYSTEM_PROMPT = "You are a careful research agent. Use tools when they help and cite what you find."


class Agent:
    def __init__(self, max_steps=6):
        self.model = ModelClient()
        self.max_steps = max_steps

    def run(self, task):
        messages = [{"role": "system", "content": SYSTEM_PROMPT}, {"role": "user", "content": task}]
        for _ in range(self.max_steps):
            message = self.model.chat(messages)
            messages.append({"role": "assistant", "content": message.content, "tool_calls": message.tool_calls})
            if not message.tool_calls:
                return message.content
            tool_responses = [run_tool_call(call) for call in message.tool_calls]
            messages.append({"role": "tool", "tool_responses": tool_responses})
        return messages[-1]["content"]
