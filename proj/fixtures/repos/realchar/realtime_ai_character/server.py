from realtime_ai_character.character_catalog.catalog_manager import CatalogManager
from realtime_ai_character.llm.openai_llm import OpenaiLlm
from realtime_ai_character.utils import ConversationHistory, build_history


async def handle_message(session_id, character_id, text, db, callback):
    catalog = CatalogManager("characters")
    catalog.load_characters()
    character = catalog.get_character(character_id)
    conversation = ConversationHistory(system_prompt=character.llm_system_prompt)
    conversation.load_from_db(session_id, db)
    llm = OpenaiLlm(model=None)
    return await llm.achat(build_history(conversation), text, character.llm_user_prompt, callback, character)
