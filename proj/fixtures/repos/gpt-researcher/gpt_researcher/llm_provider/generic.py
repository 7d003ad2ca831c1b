from langchain_core.messages import HumanMessage, SystemMessage
from langchain_openai import ChatOpenAI


class GenericLLMProvider:
    def __init__(self, llm):
        self.llm = llm

    @classmethod
    def from_provider(cls, provider, **kwargs):
        if provider == "openai":
            return cls(ChatOpenAI(**kwargs))
        raise ValueError(f"unsupported LLM provider: {provider}")

    async def get_chat_response(self, messages, stream=False):
        if not stream:
            output = await self.llm.ainvoke(messages)
            return output.content
        chunks = []
        async for chunk in self.llm.astream(messages):
            chunks.append(chunk.content)
        return "".join(chunks)


async def create_chat_completion(messages, model, temperature, max_tokens, llm_provider, **kwargs):
    provider = GenericLLMProvider.from_provider(llm_provider, model=model, temperature=temperature,
                                                max_tokens=max_tokens, **kwargs)
    wrapped = [SystemMessage(content=m["content"]) if m["role"] == "system" else HumanMessage(content=m["content"])
               for m in messages]
    return await provider.get_chat_response(wrapped)
