import langchain_openai as lc


def build(settings):
    llm = lc.ChatOpenAI(temperature=settings.t)
    return llm


def clone(llm):
    return lc.ChatOpenAI(model=llm.model)
